// curvematch: command-line front end for geodesics, means, statistics and
// curve extraction.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "curvematch/curvematch.hpp"

namespace fs = std::filesystem;
namespace cm = curvematch;
using cm::json;

namespace {

// Options shared by every command; the JSON config file uses the same names
// without the leading dashes.
struct RunConfig {
  std::string config;
  std::string metric;
  double a0 = 1.0, a1 = 1.0, a2 = 1.0;
  std::string variant = "constant";
  bool allow_degenerate = false;
  std::size_t nt = 10;
  int t_degree = 2;
  std::string modulo = "none";
  double tolerance = 0.0;  // 0 = command default
  std::size_t max_iters = 0;
  double bvp_tolerance = 1e-6;
  std::size_t bvp_max_iters = 5000;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::string out = ".";
  std::string log_file;
  std::string calibrate;  // "r0:r1:r2"
  double calibrate_total = 100.0;
  bool rescale = false;
};

struct CommandArgs {
  std::vector<std::string> inputs;
  std::string times = "0,0.25,0.5,0.75,1";
  std::string mean_file;
  std::size_t components = 3;
  std::string stddevs = "-3,-2,-1,0,1,2,3";
  std::string divisor = "n";
  std::size_t count = 6;
  std::size_t dim = 2;
  std::size_t exp_steps = 0;
  std::size_t controls = 12;
  int degree = 4;
  bool project_simplex = false;
  bool largest_area = false;
};

/// Binds options to fields and remembers how to fill them from JSON config.
class Binder {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& field, const std::string& help) {
    CLI::Option* o = app->add_option("--" + name, field, help);
    if constexpr (std::is_same_v<T, std::string>) {
      entries_[app][name] = {o, [&field](const json& j) { field = j.is_string() ? j.get<std::string>() : j.dump(); }};
    } else {
      entries_[app][name] = {o, [&field](const json& j) { field = j.get<T>(); }};
    }
    return o;
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool& field, const std::string& help) {
    CLI::Option* o = app->add_flag("--" + name, field, help);
    entries_[app][name] = {o, [&field](const json& j) { field = j.get<bool>(); }};
    return o;
  }

  /// Config values for options not given on the command line.
  void apply(const json& cfg, const std::vector<CLI::App*>& apps) const {
    if (!cfg.is_object()) throw cm::InvalidArgument("config file must hold a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      std::string key = it.key();
      std::replace(key.begin(), key.end(), '_', '-');
      bool known = false;
      for (CLI::App* app : apps) {
        const auto a = entries_.find(app);
        if (a == entries_.end()) continue;
        const auto e = a->second.find(key);
        if (e == a->second.end()) continue;
        known = true;
        if (e->second.option->count() == 0) {
          try {
            e->second.set(it.value());
          } catch (const json::exception&) {
            throw cm::InvalidArgument("config key \"" + it.key() + "\" has the wrong type");
          }
        }
      }
      if (!known && !is_other_command_key(key)) throw cm::InvalidArgument("unknown config key \"" + it.key() + "\"");
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(const json&)> set;
  };

  bool is_other_command_key(const std::string& key) const {
    for (const auto& [app, map] : entries_) {
      if (map.count(key)) return true;
    }
    return false;
  }

  std::map<CLI::App*, std::map<std::string, Entry>> entries_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw cm::InvalidArgument(std::string("bad number in ") + what + ": " + tok);
    }
  }
  return out;
}

cm::Modulo parse_modulo(const std::string& s) {
  cm::Modulo m;
  for (const auto& tok : split(s, ',')) {
    if (tok == "none" || tok == "off") continue;
    if (tok == "translation") m.translation = true;
    else if (tok == "rotation") m.rotation = true;
    else if (tok == "shift" || tok == "parameter_shift") m.parameter_shift = true;
    else throw cm::InvalidArgument("unknown --modulo entry \"" + tok + "\" (translation, rotation, shift)");
  }
  return m;
}

struct Context {
  RunConfig cfg;
  CommandArgs args;
  CLI::App* app = nullptr;
  std::map<std::string, CLI::Option*> options;  // shared options, to detect explicit flags
  cm::MetricParams params;
  cm::BvpOptions bvp;
  fs::path out;
  std::shared_ptr<spdlog::logger> log;
  bool all_converged = true;

  bool given(const std::string& name) const {
    const auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

cm::MetricParams resolve_params(const Context& ctx) {
  cm::MetricParams p;
  if (!ctx.cfg.metric.empty()) {
    const std::string& m = ctx.cfg.metric;
    json j;
    if (m.find('{') != std::string::npos) {
      try {
        j = json::parse(m);
      } catch (const json::parse_error& e) {
        throw cm::InvalidArgument(std::string("--metric is not valid JSON: ") + e.what());
      }
    } else {
      j = cm::read_json(m);
    }
    p = cm::params_from_json(j, p);
  }
  if (ctx.given("a0") || ctx.given("a1") || ctx.given("a2")) p.elastic.reset();
  if (ctx.given("a0") || ctx.cfg.metric.empty()) p.a0 = ctx.cfg.a0;
  if (ctx.given("a1") || ctx.cfg.metric.empty()) p.a1 = ctx.cfg.a1;
  if (ctx.given("a2") || ctx.cfg.metric.empty()) p.a2 = ctx.cfg.a2;
  if (ctx.given("variant") || ctx.cfg.metric.empty()) p.variant = cm::variant_from_string(ctx.cfg.variant);
  if (ctx.cfg.allow_degenerate) p.allow_degenerate = true;
  for (const auto& w : p.validate()) ctx.log->warn("{}", w);
  return p;
}

// ---------------------------------------------------------------------------
// inputs

struct Dataset {
  std::vector<cm::Curve> curves;
  std::vector<std::string> labels;
};

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, const std::vector<std::string>& exts) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (std::find(exts.begin(), exts.end(), ext) != exts.end()) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw cm::IoError("no input files in directory " + in);
      out.insert(out.end(), found.begin(), found.end());
    } else {
      if (!fs::exists(p)) throw cm::IoError("no such file: " + in);
      out.push_back(p);
    }
  }
  if (out.empty()) throw cm::InvalidArgument("no inputs given");
  return out;
}

Dataset load_dataset(const std::vector<std::string>& inputs) {
  Dataset d;
  for (const auto& p : expand_inputs(inputs, {".json"})) {
    d.curves.push_back(cm::read_curve(p));
    d.labels.push_back(p.stem().string());
  }
  for (const auto& c : d.curves) {
    if (!cm::same_basis(c, d.curves.front())) {
      throw cm::InvalidArgument("dataset curves must have equal control count, degree and dimension");
    }
  }
  return d;
}

/// Applies --calibrate (and --rescale) to a dataset; returns the JSON record.
json calibrate(Context& ctx, Dataset& d) {
  if (ctx.cfg.calibrate.empty()) return nullptr;
  const std::vector<double> r = parse_numbers([&] {
    std::string s = ctx.cfg.calibrate;
    std::replace(s.begin(), s.end(), ':', ',');
    return s;
  }(), "--calibrate");
  if (r.size() != 3) throw cm::InvalidArgument("--calibrate needs three ratios r0:r1:r2");
  const cm::Calibration c = cm::calibrate_params(d.curves, r[0], r[1], r[2], ctx.cfg.calibrate_total, ctx.cfg.rescale);
  ctx.params = c.params;
  ctx.params.variant = cm::variant_from_string(ctx.cfg.variant);
  if (c.scale != 1.0) d.curves = cm::scale_curves(d.curves, c.scale);
  ctx.log->info("calibrated a0={} a1={} a2={} scale={}", c.params.a0, c.params.a1, c.params.a2, c.scale);
  return {{"params", cm::to_json(ctx.params)},
          {"scale", c.scale},
          {"energies", {{"l2", c.energies.l2}, {"h1", c.energies.h1}, {"h2", c.energies.h2}}}};
}

void write_json(Context& ctx, const std::string& name, const json& j) {
  cm::write_json(ctx.out / name, j);
  ctx.log->info("wrote {}", (ctx.out / name).string());
}

void write_text(Context& ctx, const std::string& name, const std::string& text) {
  cm::write_text(ctx.out / name, text);
  ctx.log->info("wrote {}", (ctx.out / name).string());
}

cm::KarcherOptions karcher_options(const Context& ctx) {
  cm::KarcherOptions k;
  k.bvp = ctx.bvp;
  k.tolerance = ctx.cfg.tolerance > 0.0 ? ctx.cfg.tolerance : 1e-3;
  if (ctx.cfg.max_iters > 0) k.max_iterations = ctx.cfg.max_iters;
  k.jobs = ctx.cfg.jobs;
  k.exp_steps = ctx.args.exp_steps;
  return k;
}

// ---------------------------------------------------------------------------
// commands

json cmd_geodesic(Context& ctx) {
  if (ctx.args.inputs.size() != 2) throw cm::InvalidArgument("geodesic needs exactly two curve files");
  const cm::Curve c0 = cm::read_curve(ctx.args.inputs[0]);
  const cm::Curve c1 = cm::read_curve(ctx.args.inputs[1]);
  const cm::GeodesicResult r = cm::solve_bvp({c0, c1, ctx.params, ctx.bvp});
  ctx.all_converged = r.converged;
  json j = cm::to_json(r);
  j["params"] = cm::to_json(ctx.params);
  write_json(ctx, "geodesic.json", j);

  std::vector<cm::Curve> frames;
  std::vector<std::string> labels;
  for (double t : parse_numbers(ctx.args.times, "--times")) {
    if (t < 0.0 || t > 1.0) throw cm::InvalidArgument("--times must lie in [0, 1]");
    frames.push_back(r.path.curve_at(t));
    char buf[32];
    std::snprintf(buf, sizeof buf, "t = %.2f", t);
    labels.emplace_back(buf);
  }
  write_text(ctx, "geodesic.svg", cm::svg_filmstrip(frames, labels));
  return {{"distance", r.distance}, {"energy", r.energy.total}, {"converged", r.converged}, {"iterations", r.iterations}};
}

struct MeanRun {
  cm::MeanResult result;
  json record;
};

MeanRun compute_mean(Context& ctx, const Dataset& d) {
  MeanRun run;
  run.result = cm::karcher_mean(ctx.params, d.curves, karcher_options(ctx));
  run.record = cm::to_json(run.result, d.labels);
  run.record["params"] = cm::to_json(ctx.params);
  if (!run.result.converged) {
    ctx.all_converged = false;
    ctx.log->warn("mean did not reach grad_norm {} (got {}); large-scale curves may need --calibrate with --rescale or a larger --nt",
                  karcher_options(ctx).tolerance, run.result.grad_norm);
  }
  ctx.log->info("mean: {} iterations, grad_norm {}", run.result.iterations, run.result.grad_norm);
  return run;
}

json cmd_mean(Context& ctx) {
  Dataset d = load_dataset(ctx.args.inputs);
  const json cal = calibrate(ctx, d);
  MeanRun run = compute_mean(ctx, d);
  if (!cal.is_null()) run.record["calibration"] = cal;
  write_json(ctx, "mean.json", run.record);
  write_json(ctx, "mean_curve.json", cm::to_json(run.result.mean));
  std::vector<cm::Curve> all = d.curves;
  all.push_back(run.result.mean);
  write_text(ctx, "mean.svg", cm::svg_overlay(all, static_cast<std::ptrdiff_t>(d.curves.size()), "Karcher mean"));
  return {{"objective", run.result.objective},
          {"grad_norm", run.result.grad_norm},
          {"iterations", run.result.iterations},
          {"converged", run.result.converged}};
}

cm::PcaModel build_pca(Context& ctx, Dataset& d, json& record) {
  const json cal = calibrate(ctx, d);
  cm::Curve mean;
  std::vector<cm::TangentVector> logs;
  if (!ctx.args.mean_file.empty()) {
    mean = cm::read_curve(ctx.args.mean_file);
    if (!cm::same_basis(mean, d.curves.front())) throw cm::InvalidArgument("mean curve basis differs from the dataset's");
    for (auto& t : cm::detail::log_terms(ctx.params, mean, d.curves, ctx.bvp, ctx.cfg.jobs)) logs.push_back(t.velocity);
  } else {
    MeanRun run = compute_mean(ctx, d);
    write_json(ctx, "mean.json", run.record);
    mean = run.result.mean;
    for (auto& t : run.result.per_curve) logs.push_back(t.velocity);
  }
  const cm::Divisor div = ctx.args.divisor == "n-1" ? cm::Divisor::sample : cm::Divisor::population;
  if (ctx.args.divisor != "n" && ctx.args.divisor != "n-1") throw cm::InvalidArgument("--divisor is n or n-1");
  cm::PcaModel model = cm::tangent_pca(ctx.params, mean, logs, div);
  record = cm::to_json(model, d.labels);
  if (!cal.is_null()) record["calibration"] = cal;
  return model;
}

json batch_to_json(const cm::CurveBatch& b) {
  json curves = json::array();
  for (const auto& c : b.curves) curves.push_back(c ? cm::to_json(*c) : json(nullptr));
  return {{"curves", curves}, {"failed", b.failed}, {"messages", b.messages}};
}

json cmd_pca(Context& ctx) {
  Dataset d = load_dataset(ctx.args.inputs);
  json record;
  const cm::PcaModel model = build_pca(ctx, d, record);
  write_json(ctx, "pca.json", record);
  const std::vector<double> sds = parse_numbers(ctx.args.stddevs, "--stddevs");
  cm::ExpBatchOptions eo;
  eo.steps = ctx.args.exp_steps;
  const std::size_t k = std::min(ctx.args.components, model.components());
  for (std::size_t c = 0; c < k; ++c) {
    const cm::CurveBatch b = cm::principal_geodesic(model, c, sds, eo);
    if (!b.complete()) ctx.all_converged = false;
    json j = batch_to_json(b);
    j["component"] = c;
    j["stddevs"] = sds;
    const std::string stem = "pc" + std::to_string(c + 1);
    write_json(ctx, stem + ".json", j);
    std::vector<cm::Curve> frames;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < sds.size(); ++i) {
      if (!b.curves[i]) continue;
      frames.push_back(*b.curves[i]);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%+g sd", sds[i]);
      labels.emplace_back(buf);
    }
    write_text(ctx, stem + ".svg", cm::svg_filmstrip(frames, labels));
  }
  return {{"eigenvalues", cm::vector_to_json(model.eigenvalues.head(static_cast<Eigen::Index>(model.components())))},
          {"explained", cm::vector_to_json(model.explained)},
          {"components_exported", k}};
}

json cmd_sample(Context& ctx) {
  cm::PcaModel model;
  const bool from_model = ctx.args.inputs.size() == 1 && fs::is_regular_file(ctx.args.inputs[0]) && [&] {
    const json j = cm::read_json(ctx.args.inputs[0]);
    return j.is_object() && j.contains("eigenvalues");
  }();
  if (from_model) {
    model = cm::pca_from_json(cm::read_json(ctx.args.inputs[0]));
    ctx.params = model.params;
  } else {
    Dataset d = load_dataset(ctx.args.inputs);
    json record;
    model = build_pca(ctx, d, record);
    write_json(ctx, "pca.json", record);
  }
  cm::ExpBatchOptions eo;
  eo.steps = ctx.args.exp_steps;
  const cm::GaussianSamples s = cm::sample_gaussian(model, ctx.args.count, ctx.cfg.seed, eo);
  if (!s.batch.complete()) ctx.all_converged = false;
  json j = batch_to_json(s.batch);
  j["seed"] = ctx.cfg.seed;
  j["coefficients"] = cm::matrix_to_json(s.coefficients);
  write_json(ctx, "samples.json", j);
  std::vector<cm::Curve> frames;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < s.batch.curves.size(); ++i) {
    if (!s.batch.curves[i]) continue;
    write_json(ctx, "sample_" + std::to_string(i + 1) + ".json", cm::to_json(*s.batch.curves[i]));
    frames.push_back(*s.batch.curves[i]);
    labels.push_back("sample " + std::to_string(i + 1));
  }
  write_text(ctx, "samples.svg", cm::svg_filmstrip(frames, labels));
  return {{"samples", s.batch.curves.size()}, {"failed", s.batch.failed}};
}

json cmd_distmat(Context& ctx) {
  Dataset d = load_dataset(ctx.args.inputs);
  const json cal = calibrate(ctx, d);
  cm::DistanceOptions opt;
  opt.bvp = ctx.bvp;
  opt.jobs = ctx.cfg.jobs;
  const cm::DistanceMatrix D = cm::distance_matrix(ctx.params, d.curves, opt);
  if (!D.all_converged()) ctx.all_converged = false;
  for (const auto& m : D.messages) ctx.log->warn("{}", m);
  const double slack = 2.0 * ctx.bvp.gradient_tolerance;
  const auto violations = cm::triangle_violations(D.values, slack);
  json j = cm::to_json(D, d.labels);
  j["params"] = cm::to_json(ctx.params);
  j["triangle_violations"] = violations.size();
  j["triangle_slack"] = slack;
  if (!cal.is_null()) j["calibration"] = cal;
  write_json(ctx, "distmat.json", j);
  write_text(ctx, "distances.csv", cm::matrix_to_csv(D.values, d.labels));
  return {{"solves", D.solves}, {"all_converged", D.all_converged()}, {"triangle_violations", violations.size()}};
}

cm::LabeledMatrix load_matrix(const Context& ctx) {
  if (ctx.args.inputs.size() != 1) throw cm::InvalidArgument("expected one distance matrix CSV");
  return cm::read_matrix_csv(ctx.args.inputs[0]);
}

json cmd_mds(Context& ctx) {
  const cm::LabeledMatrix m = load_matrix(ctx);
  const cm::MdsResult r = cm::classical_mds(m.values, ctx.args.dim);
  for (const auto& w : r.warnings) ctx.log->warn("{}", w);
  write_text(ctx, "mds.csv", cm::coordinates_to_csv(r.coordinates, m.labels));
  write_json(ctx, "mds.json",
             {{"labels", m.labels},
              {"coordinates", cm::matrix_to_json(r.coordinates)},
              {"eigenvalues", cm::vector_to_json(r.eigenvalues)},
              {"negative_mass", r.negative_mass},
              {"warnings", r.warnings}});
  return {{"dim", r.coordinates.cols()}, {"negative_mass", r.negative_mass}};
}

json cmd_cluster(Context& ctx) {
  const cm::LabeledMatrix m = load_matrix(ctx);
  const cm::Dendrogram t = cm::single_linkage(m.values, m.labels);
  write_json(ctx, "dendrogram.json", cm::to_json(t));
  write_text(ctx, "dendrogram.nwk", t.newick() + "\n");
  return {{"merges", t.merges.size()}};
}

json cmd_extract(Context& ctx) {
  const std::vector<fs::path> files = expand_inputs(ctx.args.inputs, {".pgm", ".csv", ".txt"});
  struct Item {
    std::optional<cm::Curve> curve;
    json info;
    std::string error;
    std::string kind;
  };
  std::vector<Item> items(files.size());
  const cm::ComponentChoice choice =
      ctx.args.largest_area ? cm::ComponentChoice::largest_area : cm::ComponentChoice::longest_boundary;
  cm::parallel_for(files.size(), ctx.cfg.jobs, [&](std::size_t i) {
    Item& it = items[i];
    try {
      const std::string ext = files[i].extension().string();
      if (ext == ".pgm") {
        const cm::Extraction e = cm::extract_curve(cm::read_pgm(files[i].string()), ctx.args.controls, ctx.args.degree, choice);
        it.curve = e.curve;
        it.info = {{"threshold", e.threshold}, {"boundary_points", e.boundary.size()}};
      } else {
        const cm::PointSequence s = cm::read_points_csv(files[i].string(), ctx.args.project_simplex);
        it.curve = cm::points_to_curve(s, ctx.args.controls, ctx.args.degree);
        it.info = {{"points", s.size()}};
      }
    } catch (const cm::Error& e) {
      it.error = e.what();
      it.kind = std::string(cm::to_string(e.kind()));
    }
  });
  json summary = json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    json e = {{"input", files[i].string()}, {"label", files[i].stem().string()}};
    if (items[i].curve) {
      const std::string name = files[i].stem().string() + ".json";
      write_json(ctx, name, cm::to_json(*items[i].curve));
      e["output"] = name;
      e.update(items[i].info);
    } else {
      e["error"] = {{"kind", items[i].kind}, {"message", items[i].error}};
      ctx.log->error("{}: {}", files[i].string(), items[i].error);
      ctx.all_converged = false;
    }
    summary.push_back(std::move(e));
  }
  write_json(ctx, "extract.json", summary);
  std::vector<cm::Curve> curves;
  for (const auto& it : items) {
    if (it.curve) curves.push_back(*it.curve);
  }
  if (!curves.empty()) write_text(ctx, "extract.svg", cm::svg_overlay(curves, -1, "extracted curves"));
  return {{"inputs", files.size()}, {"extracted", curves.size()}};
}

std::shared_ptr<spdlog::logger> make_logger(const RunConfig& cfg) {
  auto console = std::make_shared<spdlog::sinks::stderr_sink_mt>();
  console->set_pattern("[%l] %v");
  std::vector<spdlog::sink_ptr> sinks{console};
  if (!cfg.log_file.empty()) {
    auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>(cfg.log_file, false);
    file->set_pattern("%Y-%m-%d %H:%M:%S.%e [%l] %v");
    sinks.push_back(file);
  }
  auto log = std::make_shared<spdlog::logger>("curvematch", sinks.begin(), sinks.end());
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("CURVEMATCH_LOG")) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off
    if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
  }
  log->set_level(level);
  log->flush_on(spdlog::level::trace);
  return log;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << cm::dump_json({{"error", {{"kind", kind}, {"message", message}}}}, 0) << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  RunConfig& cfg = ctx.cfg;
  CommandArgs& a = ctx.args;
  CLI::App app{"Geodesics, means and statistics of closed spline curves."};
  app.fallthrough();
  app.require_subcommand(1);
  Binder bind;

  auto shared = [&](const std::string& name, auto& field, const std::string& help) {
    ctx.options[name] = bind.add(&app, name, field, help);
  };
  app.add_option("--config", cfg.config, "JSON file with option values (flags override it)");
  shared("metric", cfg.metric, "metric parameters: JSON file or inline JSON object");
  shared("a0", cfg.a0, "L2 weight");
  shared("a1", cfg.a1, "H1 weight");
  shared("a2", cfg.a2, "H2 weight");
  shared("variant", cfg.variant, "constant or scale_invariant");
  ctx.options["allow-degenerate"] = bind.flag(&app, "allow-degenerate", cfg.allow_degenerate, "accept a0 = 0 or a2 = 0");
  shared("nt", cfg.nt, "time controls of geodesic paths");
  shared("t-degree", cfg.t_degree, "time degree of geodesic paths");
  shared("modulo", cfg.modulo, "comma list of translation, rotation, shift (or none)");
  shared("tolerance", cfg.tolerance, "gradient tolerance of the command's main solve");
  shared("max-iters", cfg.max_iters, "iteration limit of the command's main solve");
  shared("bvp-tolerance", cfg.bvp_tolerance, "gradient tolerance of inner geodesic solves");
  shared("bvp-max-iters", cfg.bvp_max_iters, "iteration limit of inner geodesic solves");
  shared("seed", cfg.seed, "seed for all randomness");
  shared("jobs", cfg.jobs, "concurrent solves, 0 = hardware threads");
  shared("out", cfg.out, "output directory");
  shared("log-file", cfg.log_file, "also log (with timestamps) to this file");
  shared("calibrate", cfg.calibrate, "calibrate a0:a1:a2 to these energy ratios on the dataset");
  shared("calibrate-total", cfg.calibrate_total, "mean energy after calibration");
  ctx.options["rescale"] = bind.flag(&app, "rescale", cfg.rescale, "rescale curves so that mean L2 and H2 energies agree");

  using Handler = json (*)(Context&);
  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto command = [&](const char* name, const char* help, Handler h) {
    CLI::App* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, h);
    return sub;
  };

  CLI::App* geo = command("geodesic", "geodesic between two curves", cmd_geodesic);
  geo->add_option("curves", a.inputs, "two curve JSON files")->required();
  bind.add(geo, "times", a.times, "comma list of times for the SVG filmstrip");

  CLI::App* mean = command("mean", "Karcher mean of a dataset", cmd_mean);
  mean->add_option("inputs", a.inputs, "curve JSON files or directories")->required();
  bind.add(mean, "exp-steps", a.exp_steps, "exponential map steps per update (0 = automatic)");

  CLI::App* pca = command("pca", "tangent PCA at the mean and principal geodesics", cmd_pca);
  pca->add_option("inputs", a.inputs, "curve JSON files or directories")->required();
  bind.add(pca, "mean", a.mean_file, "use this mean curve instead of computing it");
  bind.add(pca, "components", a.components, "principal geodesics to export");
  bind.add(pca, "stddevs", a.stddevs, "comma list of standard deviations along each geodesic");
  bind.add(pca, "divisor", a.divisor, "covariance divisor: n or n-1");
  bind.add(pca, "exp-steps", a.exp_steps, "exponential map steps (0 = automatic)");

  CLI::App* sample = command("sample", "Gaussian samples in normal coordinates at the mean", cmd_sample);
  sample->add_option("inputs", a.inputs, "pca.json model, or curve files and directories")->required();
  bind.add(sample, "count", a.count, "number of samples");
  bind.add(sample, "mean", a.mean_file, "use this mean curve instead of computing it");
  bind.add(sample, "divisor", a.divisor, "covariance divisor: n or n-1");
  bind.add(sample, "exp-steps", a.exp_steps, "exponential map steps (0 = automatic)");

  CLI::App* dist = command("distmat", "pairwise geodesic distances", cmd_distmat);
  dist->add_option("inputs", a.inputs, "curve JSON files or directories")->required();

  CLI::App* mds = command("mds", "classical multidimensional scaling of a distance matrix", cmd_mds);
  mds->add_option("matrix", a.inputs, "distance matrix CSV")->required();
  bind.add(mds, "dim", a.dim, "embedding dimension");

  CLI::App* cluster = command("cluster", "single-linkage dendrogram of a distance matrix", cmd_cluster);
  cluster->add_option("matrix", a.inputs, "distance matrix CSV")->required();

  CLI::App* extract = command("extract", "curves from PGM images or CSV point lists", cmd_extract);
  extract->add_option("inputs", a.inputs, "PGM or CSV files or directories")->required();
  bind.add(extract, "controls", a.controls, "spline controls");
  bind.add(extract, "degree", a.degree, "spline degree");
  bind.flag(extract, "project-simplex", a.project_simplex, "divide CSV rows x1,x2,x3 by their sum, keep x1,x2");
  bind.flag(extract, "largest-area", a.largest_area, "pick the component of largest area instead of longest boundary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("invalid_argument", e.what());
    return 2;
  }

  try {
    CLI::App* active = nullptr;
    Handler handler = nullptr;
    for (const auto& [sub, h] : commands) {
      if (sub->parsed()) {
        active = sub;
        handler = h;
      }
    }
    if (!cfg.config.empty()) bind.apply(cm::read_json(cfg.config), {&app, active});
    ctx.log = make_logger(cfg);
    ctx.app = active;
    ctx.params = resolve_params(ctx);
    ctx.bvp.nt = cfg.nt;
    ctx.bvp.t_degree = cfg.t_degree;
    ctx.bvp.modulo = parse_modulo(cfg.modulo);
    ctx.bvp.seed = cfg.seed;
    ctx.bvp.gradient_tolerance = cfg.bvp_tolerance;
    ctx.bvp.max_iterations = cfg.bvp_max_iters;
    if (active->get_name() == "geodesic" || active->get_name() == "distmat") {
      if (cfg.tolerance > 0.0) ctx.bvp.gradient_tolerance = cfg.tolerance;
      if (cfg.max_iters > 0) ctx.bvp.max_iterations = cfg.max_iters;
    }
    ctx.out = cfg.out;
    fs::create_directories(ctx.out);
    json summary = handler(ctx);
    summary["command"] = active->get_name();
    summary["all_converged"] = ctx.all_converged;
    std::cout << cm::dump_json(summary, 0) << std::endl;
    return ctx.all_converged ? 0 : 1;
  } catch (const cm::Error& e) {
    print_error(std::string(cm::to_string(e.kind())), e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    print_error("io_error", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 2;
  }
}
