#pragma once

// Statistics on top of geodesics: tangent PCA at a mean, principal geodesics,
// Gaussian sampling in normal coordinates, distance matrices, classical MDS,
// single-linkage clustering and metric calibration.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvematch/errors.hpp"
#include "curvematch/geodesic_bvp.hpp"
#include "curvematch/geodesic_ivp.hpp"
#include "curvematch/metric.hpp"
#include "curvematch/parallel.hpp"
#include "curvematch/splines.hpp"

namespace curvematch {

enum class Divisor { population, sample };  ///< n or n - 1

struct PcaModel {
  Curve mean;
  TangentVector center;                ///< mean of the input velocities
  Eigen::VectorXd eigenvalues;         ///< min(n, N d) values, nonincreasing, >= 0
  std::vector<TangentVector> directions;  ///< one per positive eigenvalue, G_mean-orthonormal
  Eigen::VectorXd ratio;               ///< per-component variance fraction
  Eigen::VectorXd explained;           ///< cumulative fractions, ending at 1
  Eigen::MatrixXd scores;              ///< n x k, G_mean(v_i - center, direction_k)
  double total_variance = 0.0;
  MetricParams params;

  std::size_t components() const noexcept { return directions.size(); }
};

namespace detail {

inline Eigen::Map<const Eigen::VectorXd> flat(const TangentVector& v) {
  return {v.controls().data(), v.controls().size()};
}

inline TangentVector unflat(const Curve& base, const Eigen::VectorXd& x) {
  Controls ctl = Eigen::Map<const Controls>(x.data(), static_cast<Eigen::Index>(base.size()), base.dim());
  return TangentVector(base.basis(), std::move(ctl));
}

}  // namespace detail

/// PCA of tangent vectors at `mean` with respect to G_mean, through the
/// n x n Gram matrix of the centred velocities (or the control-space
/// covariance when n exceeds the number of control coordinates).
inline PcaModel tangent_pca(const MetricParams& params, const Curve& mean,
                            const std::vector<TangentVector>& velocities,
                            Divisor divisor = Divisor::population) {
  if (velocities.empty()) throw InvalidArgument("no velocities to analyse");
  for (const auto& v : velocities) {
    if (!same_basis(mean, v)) throw InvalidArgument("velocities must share the mean's basis");
  }
  const auto n = static_cast<Eigen::Index>(velocities.size());
  const double div = divisor == Divisor::sample ? static_cast<double>(n - 1) : static_cast<double>(n);
  if (div <= 0.0) throw InvalidArgument("sample divisor needs at least two velocities");

  const Eigen::MatrixXd M = metric_matrix(params, mean, default_grid(mean.basis()));
  const Eigen::Index m = M.rows();
  Eigen::MatrixXd X(n, m);
  for (Eigen::Index i = 0; i < n; ++i) X.row(i) = detail::flat(velocities[static_cast<std::size_t>(i)]);
  const Eigen::RowVectorXd center = X.colwise().mean();
  // second moment before centring, the scale of centring roundoff
  const double raw = (X * M).cwiseProduct(X).sum() / div;
  X.rowwise() -= center;

  const Eigen::MatrixXd XM = X * M;
  const Eigen::Index spectrum = std::min(n, m);

  PcaModel out;
  out.params = params;
  out.mean = mean;
  out.center = detail::unflat(mean, center.transpose());
  out.eigenvalues.resize(spectrum);

  // Gram route: eigenvectors a of K = X M X^T / div give u = X^T a / sqrt(div lambda).
  // Primal route (more velocities than coordinates, M positive definite):
  // with M = L L^T, eigenvectors w of L^T X^T X L / div give u = L^-T w.
  Eigen::LLT<Eigen::MatrixXd> llt;
  const bool primal = n > m && (llt.compute(M), llt.info() == Eigen::Success);
  Eigen::VectorXd lam_up;
  Eigen::MatrixXd vec_up, L;
  if (primal) {
    L = llt.matrixL();
    const Eigen::MatrixXd XL = X * L;
    Eigen::MatrixXd S = XL.transpose() * XL / div;
    S = 0.5 * (S + S.transpose());
    out.total_variance = S.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    if (eig.info() != Eigen::Success) throw Error(ErrorKind::invalid_argument, "PCA eigensolver failed");
    lam_up = eig.eigenvalues();
    vec_up = eig.eigenvectors();
  } else {
    Eigen::MatrixXd K = XM * X.transpose() / div;
    K = 0.5 * (K + K.transpose());
    out.total_variance = K.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    if (eig.info() != Eigen::Success) throw Error(ErrorKind::invalid_argument, "PCA eigensolver failed");
    lam_up = eig.eigenvalues();
    vec_up = eig.eigenvectors();
  }
  const Eigen::Index top_index = lam_up.size() - 1;
  for (Eigen::Index k = 0; k < spectrum; ++k) out.eigenvalues[k] = std::max(0.0, lam_up[top_index - k]);

  const double top = spectrum > 0 ? out.eigenvalues[0] : 0.0;
  const double cutoff = std::max({1e-12 * top, 1e-24 * raw, std::numeric_limits<double>::min()});
  std::vector<Eigen::VectorXd> dirs;
  for (Eigen::Index k = 0; k < spectrum && out.eigenvalues[k] > cutoff; ++k) {
    const Eigen::VectorXd a = vec_up.col(top_index - k);
    Eigen::VectorXd u = primal ? Eigen::VectorXd(L.transpose().triangularView<Eigen::Upper>().solve(a))
                               : Eigen::VectorXd(X.transpose() * a / std::sqrt(div * out.eigenvalues[k]));
    // one pass of G-orthogonalization against earlier directions
    for (const auto& w : dirs) u -= (w.dot(M * u)) * w;
    u /= std::sqrt(u.dot(M * u));
    dirs.push_back(std::move(u));
  }
  const auto r = static_cast<Eigen::Index>(dirs.size());
  out.scores.resize(n, r);
  out.ratio.resize(r);
  out.explained.resize(r);
  const double kept = out.eigenvalues.head(r).sum();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < r; ++k) {
    out.scores.col(k) = XM * dirs[static_cast<std::size_t>(k)];
    out.ratio[k] = out.eigenvalues[k] / kept;
    acc += out.eigenvalues[k];
    out.explained[k] = acc / kept;
    out.directions.push_back(detail::unflat(mean, dirs[static_cast<std::size_t>(k)]));
  }
  if (r > 0) out.explained[r - 1] = 1.0;
  return out;
}

/// Exp-map endpoints for a batch of tangent vectors. Failed rays leave an
/// empty slot and are listed in `failed`.
struct CurveBatch {
  std::vector<std::optional<Curve>> curves;
  std::vector<std::size_t> failed;
  std::vector<std::string> messages;

  bool complete() const noexcept { return failed.empty(); }
};

struct ExpBatchOptions {
  ExpStepOptions exp;
  std::size_t steps = 0;  ///< exp_map steps per ray, 0 = default rule
};

namespace detail {

inline void shoot_into(CurveBatch& batch, const MetricParams& params, const Curve& base,
                       const TangentVector& v, const ExpBatchOptions& options) {
  const std::size_t idx = batch.curves.size();
  if (v.controls().isZero(0.0)) {
    batch.curves.emplace_back(base);
    return;
  }
  try {
    batch.curves.emplace_back(exp_map(params, base, v, options.steps, options.exp).curves.back());
  } catch (const Error& e) {
    batch.curves.emplace_back(std::nullopt);
    batch.failed.push_back(idx);
    batch.messages.emplace_back(e.what());
  }
}

}  // namespace detail

/// Exp_mean(s * sqrt(lambda_k) * direction_k) for every s.
inline CurveBatch principal_geodesic(const PcaModel& model, std::size_t component,
                                     const std::vector<double>& stddevs,
                                     const ExpBatchOptions& options = {}) {
  if (component >= model.components()) {
    throw InvalidArgument("component " + std::to_string(component) + " has no positive eigenvalue");
  }
  const double sd = std::sqrt(model.eigenvalues[static_cast<Eigen::Index>(component)]);
  CurveBatch out;
  for (double s : stddevs) {
    detail::shoot_into(out, model.params, model.mean, model.directions[component] * (s * sd), options);
  }
  return out;
}

struct GaussianSamples {
  Eigen::MatrixXd coefficients;  ///< count x components, row i holds z_i
  CurveBatch batch;
};

/// Coefficients z_k ~ N(0, lambda_k) for the positive components.
inline Eigen::MatrixXd gaussian_coefficients(const PcaModel& model, std::size_t count,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto r = static_cast<Eigen::Index>(model.components());
  Eigen::MatrixXd z(static_cast<Eigen::Index>(count), r);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index k = 0; k < r; ++k) z(i, k) = std::sqrt(model.eigenvalues[k]) * g(rng);
  }
  return z;
}

inline TangentVector combine_directions(const PcaModel& model, const Eigen::VectorXd& z) {
  TangentVector v = TangentVector::zero(model.mean);
  for (std::size_t k = 0; k < model.components(); ++k) v += model.directions[k] * z[static_cast<Eigen::Index>(k)];
  return v;
}

inline GaussianSamples sample_gaussian(const PcaModel& model, std::size_t count, std::uint64_t seed,
                                       const ExpBatchOptions& options = {}) {
  GaussianSamples out;
  out.coefficients = gaussian_coefficients(model, count, seed);
  for (Eigen::Index i = 0; i < out.coefficients.rows(); ++i) {
    detail::shoot_into(out.batch, model.params, model.mean,
                       combine_directions(model, out.coefficients.row(i).transpose()), options);
  }
  return out;
}

// ---------------------------------------------------------------------------
// distance matrices

enum class EntryStatus { ok, not_converged, failed };

struct DistanceMatrix {
  Eigen::MatrixXd values;  ///< NaN where the solve failed
  std::vector<std::vector<EntryStatus>> status;
  std::vector<std::string> messages;  ///< "i,j: reason" per bad entry
  std::size_t solves = 0;

  bool all_converged() const {
    for (const auto& row : status) {
      for (auto s : row) {
        if (s != EntryStatus::ok) return false;
      }
    }
    return true;
  }
};

struct DistanceOptions {
  BvpOptions bvp;
  std::size_t jobs = 0;
};

/// One BVP per unordered pair, mirrored into a symmetric matrix with a zero
/// diagonal.
inline DistanceMatrix distance_matrix(const MetricParams& params, const std::vector<Curve>& curves,
                                      const DistanceOptions& options = {}) {
  const std::size_t n = curves.size();
  if (n < 2) throw InvalidArgument("a distance matrix needs at least two curves");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> value(pairs.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<EntryStatus> status(pairs.size(), EntryStatus::failed);
  std::vector<std::string> reason(pairs.size());
  std::atomic<std::size_t> solves{0};
  parallel_for(pairs.size(), options.jobs, [&](std::size_t k) {
    ++solves;
    try {
      const GeodesicResult r =
          solve_bvp({curves[pairs[k].first], curves[pairs[k].second], params, options.bvp});
      value[k] = r.distance;
      status[k] = r.converged ? EntryStatus::ok : EntryStatus::not_converged;
      if (!r.converged) reason[k] = r.reason;
    } catch (const std::exception& e) {
      reason[k] = e.what();
    }
  });
  DistanceMatrix out;
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.status.assign(n, std::vector<EntryStatus>(n, EntryStatus::ok));
  out.solves = solves.load();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    out.values(a, b) = out.values(b, a) = value[k];
    out.status[i][j] = out.status[j][i] = status[k];
    if (status[k] != EntryStatus::ok) {
      out.messages.push_back(std::to_string(i) + "," + std::to_string(j) + ": " + reason[k]);
    }
  }
  return out;
}

struct TriangleViolation {
  std::size_t i, j, k;  ///< d(i,k) > d(i,j) + d(j,k) + slack
  double excess;
};

inline std::vector<TriangleViolation> triangle_violations(const Eigen::MatrixXd& D, double slack) {
  std::vector<TriangleViolation> out;
  const Eigen::Index n = D.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        const double excess = D(i, k) - D(i, j) - D(j, k);
        if (excess > slack) {
          out.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                         static_cast<std::size_t>(k), excess});
        }
      }
    }
  }
  return out;
}

namespace detail {

inline void require_distance_matrix(const Eigen::MatrixXd& D) {
  if (D.rows() != D.cols() || D.rows() == 0) throw InvalidArgument("distance matrix must be square");
  if (!D.allFinite()) throw InvalidArgument("distance matrix has non-finite entries");
  const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    if (D(i, i) != 0.0) throw InvalidArgument("distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      if (D(i, j) < 0.0) throw InvalidArgument("distance matrix has negative entries");
      if (std::abs(D(i, j) - D(j, i)) > 1e-12 * scale) {
        throw InvalidArgument("distance matrix is not symmetric");
      }
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// classical MDS

struct MdsResult {
  Eigen::MatrixXd coordinates;  ///< n x k with k <= requested dim
  Eigen::VectorXd eigenvalues;  ///< full spectrum of -J D^2 J / 2, nonincreasing
  double negative_mass = 0.0;   ///< sum |negative| / sum |all| eigenvalues
  std::vector<std::string> warnings;
};

inline MdsResult classical_mds(const Eigen::MatrixXd& D, std::size_t dim) {
  detail::require_distance_matrix(D);
  const Eigen::Index n = D.rows();
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd B = -0.5 * J * D.cwiseAbs2() * J;
  B = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::invalid_argument, "MDS eigensolver failed");

  MdsResult out;
  out.eigenvalues = eig.eigenvalues().reverse();
  const Eigen::MatrixXd V = eig.eigenvectors().rowwise().reverse();
  const double total = out.eigenvalues.cwiseAbs().sum();
  const double top = std::max(0.0, out.eigenvalues[0]);
  if (total > 0.0) {
    out.negative_mass = out.eigenvalues.cwiseMin(0.0).cwiseAbs().sum() / total;
  }
  const double cutoff = 1e-12 * std::max(top, std::numeric_limits<double>::min());
  Eigen::Index k = 0;
  while (k < n && k < static_cast<Eigen::Index>(dim) && out.eigenvalues[k] > cutoff) ++k;
  if (k < static_cast<Eigen::Index>(dim)) {
    out.warnings.push_back("only " + std::to_string(k) + " positive eigenvalues; requested " +
                           std::to_string(dim) + " dimensions");
  }
  if (out.negative_mass > 0.0) {
    out.warnings.push_back("negative eigenvalues truncated, mass fraction " +
                           std::to_string(out.negative_mass));
  }
  out.coordinates.resize(n, k);
  for (Eigen::Index c = 0; c < k; ++c) out.coordinates.col(c) = V.col(c) * std::sqrt(out.eigenvalues[c]);
  return out;
}

// ---------------------------------------------------------------------------
// single linkage

struct Merge {
  std::size_t a;  ///< cluster ids: leaves are 0..n-1, merge k creates n + k
  std::size_t b;
  double height;
  std::size_t size;
};

struct Dendrogram {
  std::vector<Merge> merges;
  std::vector<std::string> labels;

  std::size_t leaf_count() const noexcept { return labels.size(); }

  /// Leaves under a cluster id, ascending.
  std::vector<std::size_t> leaves(std::size_t id) const {
    std::vector<std::size_t> out, stack{id};
    const std::size_t n = leaf_count();
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      if (c < n) {
        out.push_back(c);
      } else {
        stack.push_back(merges.at(c - n).a);
        stack.push_back(merges.at(c - n).b);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  double height(std::size_t id) const { return id < leaf_count() ? 0.0 : merges.at(id - leaf_count()).height; }

  /// Newick string with branch lengths equal to height differences.
  std::string newick() const {
    const std::size_t n = leaf_count();
    if (n == 0) return ";";
    auto quote = [](const std::string& s) {
      if (s.find_first_of(" ()[]':;,") == std::string::npos && !s.empty()) return s;
      std::string q = "'";
      for (char ch : s) q += ch == '\'' ? std::string("''") : std::string(1, ch);
      return q + "'";
    };
    auto number = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    std::vector<std::string> text(n + merges.size());
    for (std::size_t i = 0; i < n; ++i) text[i] = quote(labels[i]);
    for (std::size_t k = 0; k < merges.size(); ++k) {
      const Merge& m = merges[k];
      text[n + k] = "(" + text[m.a] + ":" + number(m.height - height(m.a)) + "," + text[m.b] + ":" +
                    number(m.height - height(m.b)) + ")";
    }
    return text.back() + ";";
  }
};

/// Agglomerative single linkage. Among equally close cluster pairs the one
/// with the lexicographically smallest (smaller id, larger id) merges first.
inline Dendrogram single_linkage(const Eigen::MatrixXd& D, std::vector<std::string> labels = {}) {
  detail::require_distance_matrix(D);
  const auto n = static_cast<std::size_t>(D.rows());
  if (labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n) throw InvalidArgument("label count differs from matrix size");

  // active cluster ids with their distances, kept in id order
  std::vector<std::size_t> ids(n), sizes(n, 1);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  Eigen::MatrixXd dist = D;
  Dendrogram out;
  out.labels = std::move(labels);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    const auto m = static_cast<Eigen::Index>(ids.size());
    Eigen::Index bi = 0, bj = 1;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        if (dist(i, j) < dist(bi, bj)) {
          bi = i;
          bj = j;
        }
      }
    }
    const double h = dist(bi, bj);
    const std::size_t size = sizes[static_cast<std::size_t>(bi)] + sizes[static_cast<std::size_t>(bj)];
    out.merges.push_back({ids[static_cast<std::size_t>(bi)], ids[static_cast<std::size_t>(bj)], h, size});
    // the merged cluster takes the largest id, so it goes to the end
    Eigen::VectorXd merged = dist.row(bi).cwiseMin(dist.row(bj)).transpose();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != bi && i != bj) keep.push_back(i);
    }
    const auto r = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd next(r + 1, r + 1);
    std::vector<std::size_t> next_ids, next_sizes;
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) next(i, j) = dist(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
      next(i, r) = next(r, i) = merged[keep[static_cast<std::size_t>(i)]];
      next_ids.push_back(ids[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])]);
      next_sizes.push_back(sizes[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])]);
    }
    next(r, r) = 0.0;
    next_ids.push_back(n + step);
    next_sizes.push_back(size);
    dist = std::move(next);
    ids = std::move(next_ids);
    sizes = std::move(next_sizes);
  }
  return out;
}

// ---------------------------------------------------------------------------
// calibration

/// Mean L2, H1 and H2 energy parts of the linear paths between all pairs,
/// with unit coefficients.
struct EnergyMeans {
  double l2 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};

inline EnergyMeans average_linear_energies(const std::vector<Curve>& curves, double scale = 1.0) {
  if (curves.size() < 2) throw InvalidArgument("calibration needs at least two curves");
  const MetricParams unit = MetricParams::sobolev(1.0, 1.0, 1.0);
  EnergyMeans out;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const Curve a(curves[i].basis(), curves[i].controls() * scale);
      const Curve b(curves[j].basis(), curves[j].controls() * scale);
      const Path path = init_linear_path(a, b, 2, 1);
      const EnergyBreakdown e = path_energy(unit, path, PathGrids::for_path(path, 8, 0));
      out.l2 += e.e_l2;
      out.h1 += e.e_h1;
      out.h2 += e.e_h2;
      ++pairs;
    }
  }
  out.l2 /= static_cast<double>(pairs);
  out.h1 /= static_cast<double>(pairs);
  out.h2 /= static_cast<double>(pairs);
  return out;
}

struct Calibration {
  MetricParams params;
  double scale = 1.0;    ///< factor applied to every curve before using params
  EnergyMeans energies;  ///< after rescaling
};

/// Under c -> rho c the parts scale as rho^3, rho and 1/rho, so
/// rho = (E_H2 / E_L2)^(1/4) equates L2 and H2. Then
/// a_i = r_i * total / ((r0 + r1 + r2) * E_i).
inline Calibration calibrate_from_energies(const EnergyMeans& e, double r0, double r1, double r2,
                                           double total, bool rescale) {
  if (!(r0 >= 0.0 && r1 >= 0.0 && r2 >= 0.0) || !(r0 + r1 + r2 > 0.0)) {
    throw InvalidArgument("ratios must be nonnegative with a positive sum");
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw InvalidArgument("total must be positive");
  auto usable = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (((r0 > 0.0 || rescale) && !usable(e.l2)) || (r1 > 0.0 && !usable(e.h1)) ||
      ((r2 > 0.0 || rescale) && !usable(e.h2))) {
    throw DegenerateDataset("an average energy contribution is zero");
  }
  Calibration out;
  out.scale = rescale ? std::pow(e.h2 / e.l2, 0.25) : 1.0;
  const double rho = out.scale;
  out.energies = {e.l2 * rho * rho * rho, e.h1 * rho, e.h2 / rho};
  const double sum = r0 + r1 + r2;
  auto coefficient = [&](double r, double energy) { return r > 0.0 ? r * total / (sum * energy) : 0.0; };
  out.params = MetricParams::sobolev(coefficient(r0, out.energies.l2), coefficient(r1, out.energies.h1),
                                     coefficient(r2, out.energies.h2));
  out.params.allow_degenerate = r0 == 0.0 || r2 == 0.0;
  return out;
}

inline Calibration calibrate_params(const std::vector<Curve>& curves, double r0, double r1, double r2,
                                    double total, bool rescale = false) {
  return calibrate_from_energies(average_linear_energies(curves), r0, r1, r2, total, rescale);
}

inline std::vector<Curve> scale_curves(const std::vector<Curve>& curves, double scale) {
  std::vector<Curve> out;
  out.reserve(curves.size());
  for (const auto& c : curves) out.emplace_back(c.basis(), c.controls() * scale);
  return out;
}

}  // namespace curvematch
