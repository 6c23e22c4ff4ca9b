#pragma once

// Geodesics between two curves as minimizers of the discrete path energy
// over the interior time controls, optionally also over rotations,
// translations and parameter shifts of the target curve.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvematch/errors.hpp"
#include "curvematch/metric.hpp"
#include "curvematch/optimizer.hpp"
#include "curvematch/splines.hpp"

namespace curvematch {

/// Which symmetries of the target curve are quotiented out.
struct Modulo {
  bool translation = false;
  bool rotation = false;
  bool parameter_shift = false;

  bool any() const noexcept { return translation || rotation || parameter_shift; }
};

struct BvpOptions {
  std::size_t nt = 10;  ///< time controls
  int t_degree = 2;
  Modulo modulo;
  double gradient_tolerance = 1e-6;  ///< max-norm of the energy gradient
  double step_tolerance = 1e-14;
  std::size_t max_iterations = 5000;
  int time_points = 0;   ///< Gauss points per time interval, 0 = default
  int space_points = 0;  ///< Gauss points per space interval, 0 = default
  std::uint64_t seed = 0;
  std::size_t shift_candidates = 3;  ///< cyclic shifts solved in full
};

struct BvpProblem {
  Curve c0;
  Curve c1;
  MetricParams params;
  BvpOptions options;
};

/// Acts on curves by c -> R(beta) c(. - alpha) + lambda.
struct GroupElement {
  double alpha = 0.0;
  double beta = 0.0;
  Point lambda;
};

struct GeodesicResult {
  Path path;
  EnergyBreakdown energy;
  double distance = 0.0;
  double length = 0.0;
  GroupElement group;
  std::size_t iterations = 0;
  bool converged = false;
  std::string reason;
  double gradient_norm = 0.0;
  std::vector<double> energy_trace;
};

inline Eigen::Matrix2d rotation_matrix(double beta) {
  Eigen::Matrix2d r;
  r << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
  return r;
}

/// c(theta - alpha). Multiples of the knot spacing permute the controls
/// exactly; other shifts are least-squares projections onto the same basis.
inline Curve shift_curve(const Curve& c, double alpha) {
  const double h = c.basis().spacing();
  const double k = -alpha / h;
  const double r = std::round(k);
  if (std::abs(k - r) < 1e-9) return shift_controls(c, static_cast<std::ptrdiff_t>(r));
  const std::size_t samples = 16 * c.size();
  std::vector<double> params(samples);
  Controls pts(static_cast<Eigen::Index>(samples), c.dim());
  for (std::size_t m = 0; m < samples; ++m) {
    params[m] = two_pi * static_cast<double>(m) / static_cast<double>(samples);
    pts.row(static_cast<Eigen::Index>(m)) = c.eval(params[m] - alpha).transpose();
  }
  return Curve(c.basis(), fit_controls(c.basis(), params, pts));
}

inline Curve apply_group(const Curve& c, const GroupElement& g) {
  Curve s = g.alpha == 0.0 ? c : shift_curve(c, g.alpha);
  if (g.beta == 0.0 && (g.lambda.size() == 0 || g.lambda.isZero(0.0))) return s;
  Controls ctl = s.controls();
  if (g.beta != 0.0) {
    if (c.dim() != 2) throw UnsupportedDimension(c.dim(), "rotation group");
    ctl = ctl * rotation_matrix(g.beta).transpose();
  }
  if (g.lambda.size() != 0) {
    if (g.lambda.size() != c.dim()) throw InvalidArgument("translation has the wrong dimension");
    ctl.rowwise() += g.lambda.transpose();
  }
  return Curve(c.basis(), std::move(ctl));
}

/// Linear interpolation of the controls of c0 and c1 at the Greville
/// abscissae of the clamped time basis, which reproduces the path
/// (1 - t) c0 + t c1.
inline Path init_linear_path(const Curve& c0, const Curve& c1, std::size_t nt, int t_degree) {
  if (!same_basis(c0, c1)) throw InvalidArgument("endpoint curves use different bases");
  if (t_degree < 1) throw InvalidArgument("time degree must be at least 1");
  KnotVector tb(nt, t_degree, KnotKind::clamped);
  const auto N = static_cast<Eigen::Index>(c0.size());
  Controls ctl(static_cast<Eigen::Index>(nt) * N, c0.dim());
  const auto& u = tb.knots();
  for (std::size_t i = 0; i < nt; ++i) {
    auto block = ctl.middleRows(static_cast<Eigen::Index>(i) * N, N);
    if (i == 0) {
      block = c0.controls();
    } else if (i + 1 == nt) {
      block = c1.controls();
    } else {
      double g = 0.0;
      for (int k = 1; k <= t_degree; ++k) g += u[i + static_cast<std::size_t>(k)];
      g /= t_degree;
      block = c0.controls() + g * (c1.controls() - c0.controls());
    }
  }
  return Path(std::move(tb), c0.basis(), std::move(ctl));
}

/// Rotation and translation of `moving` that best match `fixed` in the
/// least-squares sense over the controls.
inline GroupElement align_controls(const Curve& fixed, const Curve& moving, bool rotation,
                                   bool translation) {
  GroupElement g;
  const int d = fixed.dim();
  g.lambda = Point::Zero(d);
  Controls X = fixed.controls(), Y = moving.controls();
  Point mx = Point::Zero(d), my = Point::Zero(d);
  if (translation) {
    mx = X.colwise().mean().transpose();
    my = Y.colwise().mean().transpose();
    X.rowwise() -= mx.transpose();
    Y.rowwise() -= my.transpose();
  }
  if (rotation) {
    if (d != 2) throw UnsupportedDimension(d, "rotation group");
    double dot = 0.0, cross = 0.0;
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      dot += X(j, 0) * Y(j, 0) + X(j, 1) * Y(j, 1);
      cross += Y(j, 0) * X(j, 1) - Y(j, 1) * X(j, 0);
    }
    if (dot != 0.0 || cross != 0.0) g.beta = std::atan2(cross, dot);
  }
  if (translation) {
    Point rmy = my;
    if (rotation) rmy = rotation_matrix(g.beta) * my;
    g.lambda = mx - rmy;
  }
  return g;
}

namespace detail {

inline double linear_path_energy(const MetricParams& params, const Curve& c0, const Curve& c1,
                                 int space_points) {
  const Path p = init_linear_path(c0, c1, 2, 1);
  const PathGrids grids = PathGrids::for_path(p, 0, space_points);
  return evaluate_path(params, grids, 2, p.ntheta(), p.dim(), p.controls().data()).energy.total;
}

/// One energy minimization with a fixed parameter shift `alpha` already
/// applied to `target`. Rotation and translation (if requested) remain free.
inline GeodesicResult solve_fixed_shift(const MetricParams& params, const Curve& c0,
                                        const Curve& target, double alpha,
                                        const BvpOptions& opt) {
  const bool rot = opt.modulo.rotation;
  const bool trans = opt.modulo.translation;
  const int d = c0.dim();
  if (rot && d != 2) throw UnsupportedDimension(d, "rotation group");
  const auto N = static_cast<Eigen::Index>(c0.size());
  const Eigen::Index Nd = N * d;
  const std::size_t nt = opt.nt;
  if (nt < 2) throw InvalidArgument("a path needs at least two time controls");
  const auto nint = static_cast<Eigen::Index>(nt) - 2;
  const Eigen::Index nvp = nint * Nd;
  const Eigen::Index ng = (rot ? 1 : 0) + (trans ? d : 0);
  const Eigen::Index nv = nvp + ng;
  const auto last = static_cast<Eigen::Index>(nt) - 1;

  GroupElement g0 = align_controls(c0, target, rot, trans);
  g0.alpha = alpha;
  Curve start_target = target;
  if (rot || trans) {
    GroupElement rt = g0;
    rt.alpha = 0.0;
    start_target = apply_group(target, rt);
  }
  Path path = init_linear_path(c0, start_target, nt, opt.t_degree);
  const PathGrids grids = PathGrids::for_path(path, opt.time_points, opt.space_points);
  Controls& full = path.controls();
  const Controls& Y = target.controls();

  Eigen::VectorXd x0(nv);
  if (nvp > 0) x0.head(nvp) = Eigen::Map<const Eigen::VectorXd>(full.data() + Nd, nvp);
  {
    Eigen::Index k = nvp;
    if (rot) x0[k++] = g0.beta;
    if (trans) {
      for (int a = 0; a < d; ++a) x0[k++] = g0.lambda[a];
    }
  }

  auto unpack = [&](const Eigen::VectorXd& x, double& beta, Point& lambda) {
    beta = 0.0;
    lambda = Point::Zero(d);
    Eigen::Index k = nvp;
    if (rot) beta = x[k++];
    if (trans) {
      for (int a = 0; a < d; ++a) lambda[a] = x[k++];
    }
  };
  // Fills the control grid from x. The last row is the target itself when
  // no group variable is active, so that it is reproduced bit for bit.
  Controls rotated_target(N, d);
  auto assemble = [&](const Eigen::VectorXd& x) {
    if (nvp > 0) Eigen::Map<Eigen::VectorXd>(full.data() + Nd, nvp) = x.head(nvp);
    auto last_rows = full.middleRows(last * N, N);
    if (!rot && !trans) {
      last_rows = Y;
      return;
    }
    double beta;
    Point lambda;
    unpack(x, beta, lambda);
    rotated_target = rot ? Controls(Y * rotation_matrix(beta).transpose()) : Y;
    last_rows = rotated_target;
    last_rows.rowwise() += lambda.transpose();
  };

  Controls grad;
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    assemble(x);
    const PathEvaluation e = evaluate_path(params, grids, nt, static_cast<std::size_t>(N), d,
                                           full.data(), &grad);
    if (!e.regular) return std::numeric_limits<double>::infinity();
    g.resize(nv);
    if (nvp > 0) g.head(nvp) = Eigen::Map<const Eigen::VectorXd>(grad.data() + Nd, nvp);
    Eigen::Index k = nvp;
    const auto gl = grad.middleRows(last * N, N);
    if (rot) {
      // d/dbeta of R(beta) y is J R(beta) y with J the quarter turn
      double s = 0.0;
      for (Eigen::Index j = 0; j < N; ++j) {
        s += gl(j, 0) * -rotated_target(j, 1) + gl(j, 1) * rotated_target(j, 0);
      }
      g[k++] = s;
    }
    if (trans) {
      for (int a = 0; a < d; ++a) g[k++] = gl.col(a).sum();
    }
    return e.energy.total;
  };

  // Seed inverse Hessian: the energy of a path is 1/2 X^T (K_t (x) M) X when
  // the metric is frozen, with K_t the time stiffness matrix.
  Eigen::MatrixXd H0;
  if (nv > 0) {
    Eigen::MatrixXd M = 0.5 * (metric_matrix(params, c0, grids.space) +
                               metric_matrix(params, start_target, grids.space));
    M.diagonal().array() += 1e-10 * M.diagonal().mean();
    const Eigen::MatrixXd& B1 = grids.time.basis(1);
    const Eigen::MatrixXd K = B1.transpose() * grids.time.weight_vector().asDiagonal() * B1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nv, nv);
    for (Eigen::Index a = 0; a < nint; ++a) {
      for (Eigen::Index b = 0; b < nint; ++b) A.block(a * Nd, b * Nd, Nd, Nd) = K(a + 1, b + 1) * M;
    }
    if (ng > 0) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(Nd, ng);
      Eigen::Index col = 0;
      const Controls& Z = start_target.controls();
      if (rot) {
        for (Eigen::Index j = 0; j < N; ++j) {
          T(j * d, col) = -(Z(j, 1) - g0.lambda[1]);
          T(j * d + 1, col) = Z(j, 0) - g0.lambda[0];
        }
        ++col;
      }
      if (trans) {
        for (int a = 0; a < d; ++a, ++col) {
          for (Eigen::Index j = 0; j < N; ++j) T(j * d + a, col) = 1.0;
        }
      }
      const Eigen::MatrixXd MT = M * T;
      for (Eigen::Index a = 0; a < nint; ++a) {
        A.block(a * Nd, nvp, Nd, ng) = K(a + 1, last) * MT;
        A.block(nvp, a * Nd, ng, Nd) = K(a + 1, last) * MT.transpose();
      }
      A.block(nvp, nvp, ng, ng) = K(last, last) * (T.transpose() * MT);
    }
    A.diagonal().array() += 1e-10 * A.diagonal().cwiseAbs().maxCoeff();
    H0 = A.ldlt().solve(Eigen::MatrixXd::Identity(nv, nv));
    H0 = 0.5 * (H0 + H0.transpose()).eval();
  }

  Eigen::VectorXd probe(nv);
  double f0 = objective(x0, probe);
  if (!std::isfinite(f0)) {
    // degenerate initial path: one restart from a seeded perturbation
    std::mt19937_64 rng(opt.seed);
    const Controls centered = c0.controls().rowwise() - c0.controls().colwise().mean();
    const double scale = 1e-2 * std::sqrt(centered.squaredNorm() / static_cast<double>(N));
    std::normal_distribution<double> noise(0.0, scale);
    for (Eigen::Index k = 0; k < nvp; ++k) x0[k] += noise(rng);
    f0 = objective(x0, probe);
    if (!std::isfinite(f0)) {
      assemble(x0);
      const PathEvaluation e = evaluate_path(params, grids, nt, static_cast<std::size_t>(N), d,
                                             full.data());
      throw DegeneratePath(e.bad_t, e.bad_theta);
    }
  }

  MinimizeOptions mo;
  mo.gradient_tolerance = opt.gradient_tolerance;
  mo.step_tolerance = opt.step_tolerance;
  mo.max_iterations = opt.max_iterations;
  MinimizeResult r = minimize_bfgs(objective, x0, H0, mo);

  assemble(r.x);
  const PathEvaluation e = evaluate_path(params, grids, nt, static_cast<std::size_t>(N), d,
                                         full.data());
  GeodesicResult out;
  out.energy = e.energy;
  out.distance = std::sqrt(2.0 * std::max(0.0, e.energy.total));
  out.length = e.length;
  out.group.alpha = alpha;
  unpack(r.x, out.group.beta, out.group.lambda);
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.reason = r.reason;
  out.gradient_norm = r.gradient_norm;
  out.energy_trace = std::move(r.trace);
  out.path = std::move(path);
  return out;
}

}  // namespace detail

/// Minimizes the discrete path energy between problem.c0 and problem.c1.
inline GeodesicResult solve_bvp(const BvpProblem& problem) {
  const Curve& c0 = problem.c0;
  const Curve& c1 = problem.c1;
  const BvpOptions& opt = problem.options;
  if (!same_basis(c0, c1)) throw InvalidArgument("endpoint curves use different bases");
  if (opt.nt < static_cast<std::size_t>(opt.t_degree) + 1) {
    throw InvalidArgument("nt must be at least t_degree + 1");
  }
  problem.params.validate();
  {
    const QuadratureGrid g = QuadratureGrid(c0.basis(), opt.space_points > 0
                                                            ? opt.space_points
                                                            : default_quadrature_points(c0.degree()));
    detail::require_regular(detail::slice_quadratic(problem.params, g, c0.controls(),
                                                    Controls::Zero(c0.size(), c0.dim())),
                            g);
    detail::require_regular(detail::slice_quadratic(problem.params, g, c1.controls(),
                                                    Controls::Zero(c1.size(), c1.dim())),
                            g);
  }
  if (!opt.modulo.parameter_shift) return detail::solve_fixed_shift(problem.params, c0, c1, 0.0, opt);

  // Rank all cyclic shifts by the energy of the aligned linear path, solve the
  // best few in full, then refine with a parabola through the neighbours.
  const auto N = static_cast<std::ptrdiff_t>(c1.size());
  const double h = c1.basis().spacing();
  std::vector<double> rough(static_cast<std::size_t>(N));
  for (std::ptrdiff_t k = 0; k < N; ++k) {
    const Curve s = shift_controls(c1, k);
    GroupElement g = align_controls(c0, s, opt.modulo.rotation, opt.modulo.translation);
    rough[static_cast<std::size_t>(k)] =
        detail::linear_path_energy(problem.params, c0, apply_group(s, g), opt.space_points);
  }
  std::vector<std::ptrdiff_t> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return rough[static_cast<std::size_t>(a)] < rough[static_cast<std::size_t>(b)];
  });

  std::vector<std::optional<GeodesicResult>> solved(static_cast<std::size_t>(N));
  std::exception_ptr last_error;
  auto solve_shift = [&](std::ptrdiff_t k) -> const GeodesicResult* {
    k = ((k % N) + N) % N;
    auto& slot = solved[static_cast<std::size_t>(k)];
    if (!slot) {
      try {
        slot = detail::solve_fixed_shift(problem.params, c0, shift_controls(c1, k),
                                         -static_cast<double>(k) * h, opt);
      } catch (const DegeneratePath&) {
        last_error = std::current_exception();
        return nullptr;
      }
    }
    return &*slot;
  };
  auto energy_of = [](const GeodesicResult* r) {
    return r ? r->energy.total : std::numeric_limits<double>::infinity();
  };

  const std::size_t count = std::min<std::size_t>(std::max<std::size_t>(opt.shift_candidates, 1),
                                                  static_cast<std::size_t>(N));
  std::ptrdiff_t best = -1;
  for (std::size_t i = 0; i < count; ++i) {
    const std::ptrdiff_t k = order[i];
    const GeodesicResult* r = solve_shift(k);
    if (r && (best < 0 || r->energy.total < solved[static_cast<std::size_t>(best)]->energy.total)) {
      best = k;
    }
  }
  if (best < 0) std::rethrow_exception(last_error);
  const double e_minus = energy_of(solve_shift(best - 1));
  const double e_plus = energy_of(solve_shift(best + 1));
  for (std::ptrdiff_t k : {best - 1, best + 1}) {
    const auto kk = static_cast<std::size_t>(((k % N) + N) % N);
    if (solved[kk] && solved[kk]->energy.total < solved[static_cast<std::size_t>(best)]->energy.total) {
      best = static_cast<std::ptrdiff_t>(kk);
    }
  }
  GeodesicResult result = *solved[static_cast<std::size_t>(best)];

  const double e0 = result.energy.total;
  const double curv = e_minus - 2.0 * e0 + e_plus;
  if (std::isfinite(curv) && curv > 0.0) {
    const double delta = std::clamp(0.5 * (e_minus - e_plus) / curv, -0.5, 0.5);
    if (std::abs(delta) > 1e-3) {
      const double alpha = -(static_cast<double>(best) + delta) * h;
      try {
        GeodesicResult refined =
            detail::solve_fixed_shift(problem.params, c0, shift_curve(c1, alpha), alpha, opt);
        if (refined.energy.total < e0) result = std::move(refined);
      } catch (const DegeneratePath&) {
      }
    }
  }
  // report alpha in (-pi, pi]
  result.group.alpha = std::remainder(result.group.alpha, two_pi);
  return result;
}

inline double distance(const Curve& c0, const Curve& c1, const MetricParams& params,
                       const BvpOptions& options = {}) {
  return solve_bvp({c0, c1, params, options}).distance;
}

/// Reparametrizes c proportionally to arc length: `samples` points at equal
/// arc-length spacing are refit at uniform parameters in the same basis.
inline Curve reparam_constant_speed(const Curve& c, std::size_t samples = 0) {
  const std::size_t N = c.size();
  if (samples == 0) samples = 20 * N;
  if (samples < N) throw InvalidArgument("need at least as many samples as controls");
  const GaussRule rule = gauss_legendre(5);
  const double eps = 1e-12 * c.basis().spacing();
  auto speed = [&](double th) { return c.eval(th, 1).norm(); };
  auto piece = [&](double a, double b) {
    double s = 0.0;
    for (int m = 0; m < 5; ++m) {
      s += 0.5 * (b - a) * rule.weights[m] * speed(a + 0.5 * (b - a) * (rule.nodes[m] + 1.0));
    }
    return s;
  };
  const std::size_t M = N * ((4 * samples + N - 1) / N);
  std::vector<double> S(M + 1, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    const double a = two_pi * static_cast<double>(m) / static_cast<double>(M);
    const double b = two_pi * static_cast<double>(m + 1) / static_cast<double>(M);
    for (int q = 0; q < 5; ++q) {
      const double th = a + 0.5 * (b - a) * (rule.nodes[q] + 1.0);
      if (speed(th) <= eps) throw DegenerateCurve(m, th);
    }
    S[m + 1] = S[m] + piece(a, b);
  }
  const double total = S[M];

  std::vector<double> params(samples);
  Controls pts(static_cast<Eigen::Index>(samples), c.dim());
  for (std::size_t k = 0; k < samples; ++k) {
    const double sigma = total * static_cast<double>(k) / static_cast<double>(samples);
    auto it = std::upper_bound(S.begin(), S.end(), sigma);
    std::size_t m = static_cast<std::size_t>(std::distance(S.begin(), it));
    m = std::clamp<std::size_t>(m, 1, M) - 1;
    const double a = two_pi * static_cast<double>(m) / static_cast<double>(M);
    const double b = two_pi * static_cast<double>(m + 1) / static_cast<double>(M);
    double th = a + (b - a) * (sigma - S[m]) / std::max(S[m + 1] - S[m], 1e-300);
    for (int it_n = 0; it_n < 30; ++it_n) {
      const double f = S[m] + piece(a, th) - sigma;
      if (std::abs(f) <= 1e-15 * total) break;
      th = std::clamp(th - f / speed(th), a, b);
    }
    params[k] = two_pi * static_cast<double>(k) / static_cast<double>(samples);
    pts.row(static_cast<Eigen::Index>(k)) = c.eval(th).transpose();
  }
  return Curve(c.basis(), fit_controls(c.basis(), params, pts));
}

}  // namespace curvematch
