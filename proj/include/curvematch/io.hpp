#pragma once

// JSON and CSV serialization of curves, paths, parameters and results.
// Numbers are written with 17 significant digits so that every double
// round-trips exactly.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvematch/errors.hpp"
#include "curvematch/geodesic_bvp.hpp"
#include "curvematch/geodesic_ivp.hpp"
#include "curvematch/karcher.hpp"
#include "curvematch/metric.hpp"
#include "curvematch/splines.hpp"
#include "curvematch/stats.hpp"

namespace curvematch {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// output

inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void dump_into(std::string& out, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  // arrays of numbers stay on one line
  auto flat_array = [](const json& a) {
    for (const auto& e : a) {
      if (e.is_structured()) return false;
    }
    return true;
  };
  switch (j.type()) {
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += "{";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",";
        first = false;
        out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_into(out, it.value(), indent, depth + 1);
      }
      out += close + "}";
      break;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      const bool inline_items = flat_array(j);
      out += "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += inline_items && indent > 0 ? ", " : ",";
        first = false;
        if (!inline_items) out += pad;
        dump_into(out, e, indent, depth + 1);
      }
      out += (inline_items ? "" : close) + "]";
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string dump_json(const json& j, int indent = 2) {
  std::string out;
  detail::dump_into(out, j, indent, 0);
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, dump_json(j) + "\n"); }

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// curves and paths

inline json controls_to_json(const Controls& c) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < c.cols(); ++k) row.push_back(c(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Controls controls_from_json(const json& j, int dim) {
  if (!j.is_array() || j.empty()) throw IoError("controls must be a nonempty array");
  Controls c(static_cast<Eigen::Index>(j.size()), dim);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != static_cast<std::size_t>(dim)) {
      throw IoError("control " + std::to_string(i) + " does not have " + std::to_string(dim) + " coordinates");
    }
    for (int k = 0; k < dim; ++k) {
      if (!j[i][static_cast<std::size_t>(k)].is_number()) throw IoError("control coordinates must be numbers");
      c(static_cast<Eigen::Index>(i), k) = j[i][static_cast<std::size_t>(k)].get<double>();
    }
  }
  return c;
}

namespace detail {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(std::string("field \"") + key + "\" has the wrong type");
  }
}

}  // namespace detail

inline json to_json(const Curve& c) {
  return {{"dim", c.dim()}, {"degree", c.degree()}, {"controls", controls_to_json(c.controls())}};
}

inline Curve curve_from_json(const json& j) {
  const int dim = detail::field<int>(j, "dim");
  const int degree = detail::field<int>(j, "degree");
  if (dim < 1 || dim > max_dim) throw UnsupportedDimension(dim, "curve files");
  Controls ctl = controls_from_json(j.at("controls"), dim);
  try {
    return Curve::from_controls(std::move(ctl), degree);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("invalid curve: ") + e.what());
  }
}

inline Curve read_curve(const std::filesystem::path& path) {
  try {
    return curve_from_json(read_json(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline json to_json(const Path& p) {
  return {{"dim", p.dim()},
          {"t_degree", p.time_basis().degree()},
          {"s_degree", p.space_basis().degree()},
          {"nt", p.nt()},
          {"ntheta", p.ntheta()},
          {"controls", controls_to_json(p.controls())}};
}

inline Path path_from_json(const json& j) {
  const int dim = detail::field<int>(j, "dim");
  const auto nt = detail::field<std::size_t>(j, "nt");
  const auto ntheta = detail::field<std::size_t>(j, "ntheta");
  Controls ctl = controls_from_json(j.at("controls"), dim);
  return Path(KnotVector(nt, detail::field<int>(j, "t_degree"), KnotKind::clamped),
              KnotVector(ntheta, detail::field<int>(j, "s_degree"), KnotKind::periodic), std::move(ctl));
}

// ---------------------------------------------------------------------------
// parameters and results

inline json to_json(const MetricParams& p) {
  if (p.elastic) return {{"elastic", {{"a", p.elastic->a}, {"b", p.elastic->b}}}};
  json j = {{"a0", p.a0},
            {"a1", p.a1},
            {"a2", p.a2},
            {"variant", p.variant == Variant::scale_invariant ? "scale_invariant" : "constant"}};
  if (p.allow_degenerate) j["allow_degenerate"] = true;
  return j;
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "constant") return Variant::constant;
  if (s == "scale_invariant") return Variant::scale_invariant;
  throw InvalidArgument("unknown metric variant \"" + s + "\" (constant or scale_invariant)");
}

/// Fields present in j override those of `base`.
inline MetricParams params_from_json(const json& j, MetricParams base = {}) {
  if (!j.is_object()) throw IoError("metric must be a JSON object");
  if (j.contains("elastic")) {
    const json& e = j.at("elastic");
    return MetricParams::elastic_metric(detail::field<double>(e, "a"), detail::field<double>(e, "b"));
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "a0") base.a0 = detail::field<double>(j, "a0");
    else if (k == "a1") base.a1 = detail::field<double>(j, "a1");
    else if (k == "a2") base.a2 = detail::field<double>(j, "a2");
    else if (k == "variant") base.variant = variant_from_string(detail::field<std::string>(j, "variant"));
    else if (k == "allow_degenerate") base.allow_degenerate = detail::field<bool>(j, "allow_degenerate");
    else throw IoError("unknown metric field \"" + k + "\"");
  }
  return base;
}

inline json to_json(const EnergyBreakdown& e) {
  return {{"l2", e.e_l2}, {"h1", e.e_h1}, {"h2", e.e_h2}, {"total", e.total}};
}

inline json to_json(const GroupElement& g) {
  json lambda = json::array();
  for (Eigen::Index k = 0; k < g.lambda.size(); ++k) lambda.push_back(g.lambda[k]);
  return {{"alpha", g.alpha}, {"beta", g.beta}, {"lambda", lambda}};
}

inline json to_json(const GeodesicResult& r) {
  json j = to_json(r.path);
  j["energy"] = to_json(r.energy);
  j["distance"] = r.distance;
  j["length"] = r.length;
  j["group"] = to_json(r.group);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["reason"] = r.reason;
  j["gradient_norm"] = r.gradient_norm;
  return j;
}

inline json to_json(const DiscreteGeodesic& g) {
  json curves = json::array();
  for (const auto& c : g.curves) curves.push_back(to_json(c));
  return {{"curves", curves}, {"params", to_json(g.params)}};
}

inline json to_json(const MeanResult& r, const std::vector<std::string>& labels = {}) {
  json per = json::array();
  for (std::size_t i = 0; i < r.per_curve.size(); ++i) {
    json e = {{"distance", r.per_curve[i].distance}};
    if (i < labels.size()) e["label"] = labels[i];
    per.push_back(std::move(e));
  }
  json trace = json::array();
  for (double f : r.objective_trace) trace.push_back(f);
  return {{"mean", to_json(r.mean)},     {"objective", r.objective}, {"grad_norm", r.grad_norm},
          {"iterations", r.iterations},  {"converged", r.converged}, {"per_curve", per},
          {"objective_trace", trace}};
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline json to_json(const PcaModel& m, const std::vector<std::string>& labels = {}) {
  json dirs = json::array();
  for (const auto& d : m.directions) dirs.push_back(controls_to_json(d.controls()));
  json j = {{"mean", to_json(m.mean)},
            {"params", to_json(m.params)},
            {"eigenvalues", vector_to_json(m.eigenvalues)},
            {"ratio", vector_to_json(m.ratio)},
            {"explained", vector_to_json(m.explained)},
            {"total_variance", m.total_variance},
            {"center", controls_to_json(m.center.controls())},
            {"directions", dirs},
            {"scores", matrix_to_json(m.scores)}};
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

inline PcaModel pca_from_json(const json& j) {
  PcaModel m;
  try {
    m.mean = curve_from_json(j.at("mean"));
    m.params = params_from_json(j.at("params"));
    m.eigenvalues = vector_from_json(j.at("eigenvalues"));
    m.ratio = vector_from_json(j.at("ratio"));
    m.explained = vector_from_json(j.at("explained"));
    m.total_variance = j.at("total_variance").get<double>();
    m.center = TangentVector(m.mean.basis(), controls_from_json(j.at("center"), m.mean.dim()));
    for (const auto& d : j.at("directions")) {
      m.directions.emplace_back(m.mean.basis(), controls_from_json(d, m.mean.dim()));
    }
    const json& s = j.at("scores");
    m.scores.resize(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(m.directions.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      m.scores.row(static_cast<Eigen::Index>(i)) = vector_from_json(s[i]).transpose();
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed PCA model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("malformed PCA model: ") + e.what());
  }
  if (static_cast<std::size_t>(m.eigenvalues.size()) < m.directions.size()) {
    throw IoError("malformed PCA model: fewer eigenvalues than directions");
  }
  return m;
}

inline json to_json(const Dendrogram& d) {
  json merges = json::array();
  for (const auto& m : d.merges) {
    merges.push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  }
  return {{"labels", d.labels}, {"merges", merges}, {"newick", d.newick()}};
}

inline const char* to_string(EntryStatus s) {
  switch (s) {
    case EntryStatus::ok:
      return "ok";
    case EntryStatus::not_converged:
      return "not_converged";
    case EntryStatus::failed:
      return "failed";
  }
  return "failed";
}

inline json to_json(const DistanceMatrix& D, const std::vector<std::string>& labels) {
  json status = json::array();
  for (const auto& row : D.status) {
    json r = json::array();
    for (auto s : row) r.push_back(to_string(s));
    status.push_back(std::move(r));
  }
  return {{"labels", labels},     {"values", matrix_to_json(D.values)}, {"status", status},
          {"solves", D.solves},   {"messages", D.messages},             {"all_converged", D.all_converged()}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

/// Square matrix with a header row and a label column.
inline std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
  std::string out = "label";
  for (const auto& l : labels) out += "," + csv_field(l);
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += csv_field(labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < m.cols(); ++k) out += "," + csv_number(m(i, k));
    out += "\n";
  }
  return out;
}

/// Rows of coordinates with a label column and headers x1..xk.
inline std::string coordinates_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
  std::string out = "label";
  for (Eigen::Index k = 0; k < m.cols(); ++k) out += ",x" + std::to_string(k + 1);
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += csv_field(labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < m.cols(); ++k) out += "," + csv_number(m(i, k));
    out += "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

struct LabeledMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;
};

/// Reads a square labeled matrix as written by matrix_to_csv. A matrix
/// without header or label column is accepted too (labels 0..n-1).
inline LabeledMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(detail::split_csv_line(line));
  }
  if (rows.empty()) throw IoError(path.string() + ": empty matrix file");
  auto number = [&](const std::string& s, double& v) {
    try {
      std::size_t pos = 0;
      v = std::stod(s, &pos);
      return pos == s.size();
    } catch (const std::exception&) {
      return false;
    }
  };
  double probe = 0.0;
  const bool labeled = !number(rows[0][0], probe);  // header row plus label column
  LabeledMatrix out;
  const std::size_t first = labeled ? 1 : 0;
  const std::size_t n = rows.size() - first;
  const std::size_t offset = labeled ? 1 : 0;
  if (labeled && rows[0].size() != n + 1) throw IoError(path.string() + ": header length differs from row count");
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[first + i];
    if (r.size() != n + offset) throw IoError(path.string() + ": row " + std::to_string(i) + " has the wrong length");
    out.labels.push_back(labeled ? r[0] : std::to_string(i));
    for (std::size_t k = 0; k < n; ++k) {
      double v = 0.0;
      if (!number(r[k + offset], v)) throw IoError(path.string() + ": bad number \"" + r[k + offset] + "\"");
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  if (labeled) {
    for (std::size_t k = 0; k < n; ++k) {
      if (rows[0][k + 1] != out.labels[k]) throw IoError(path.string() + ": header and row labels differ");
    }
  }
  return out;
}

}  // namespace curvematch
