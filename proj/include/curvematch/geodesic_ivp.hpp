#pragma once

// Time-discrete geodesic shooting (exponential map) and the logarithm map
// obtained from the boundary value solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvematch/errors.hpp"
#include "curvematch/geodesic_bvp.hpp"
#include "curvematch/metric.hpp"
#include "curvematch/splines.hpp"

namespace curvematch {

struct DiscreteGeodesic {
  std::vector<Curve> curves;
  MetricParams params;
};

struct ExpStepOptions {
  double tolerance = 1e-9;  ///< on the max-norm of the stationarity residual
  std::size_t max_iterations = 50;
  int space_points = 0;
  /// Test hook: evaluate both metric terms at c0 and drop the variation of
  /// the metric, which turns the step into c2 = 2 c1 - c0.
  bool frozen_metric = false;
};

inline QuadratureGrid step_grid(const Curve& c, int space_points) {
  return QuadratureGrid(c.basis(), space_points > 0 ? space_points : default_quadrature_points(c.degree()));
}

/// E2(c0, c1, c2) = G_c0(c1 - c0, c1 - c0) + G_c1(c2 - c1, c2 - c1).
inline double discrete_energy(const MetricParams& params, const Curve& c0, const Curve& c1,
                              const Curve& c2, const QuadratureGrid& grid) {
  if (!same_basis(c0, c1) || !same_basis(c1, c2)) {
    throw InvalidArgument("curves of a discrete path must share one basis");
  }
  detail::require_grid(c0, grid);
  const detail::SliceValue a =
      detail::slice_quadratic(params, grid, c0.controls(), c1.controls() - c0.controls());
  detail::require_regular(a, grid);
  const detail::SliceValue b =
      detail::slice_quadratic(params, grid, c1.controls(), c2.controls() - c1.controls());
  detail::require_regular(b, grid);
  return a.total + b.total;
}

inline double discrete_energy(const MetricParams& params, const Curve& c0, const Curve& c1,
                              const Curve& c2) {
  return discrete_energy(params, c0, c1, c2, default_grid(c0.basis()));
}

namespace detail {

/// Pieces of the stationarity residual of E2 in c1, as flat vectors:
/// R(w) = 2 G_c0(c1 - c0, .) + D_c1 G(w, w) - 2 G_c1(w, .), with w = c2 - c1.
struct StepSystem {
  const MetricParams& params;
  const QuadratureGrid& grid;
  Controls c1;
  Eigen::VectorXd r0;  ///< 2 G_c0(c1 - c0, .)
  Eigen::MatrixXd M1;  ///< Gram matrix of the metric at c1 (at c0 when frozen)
  bool frozen;

  Eigen::VectorXd variation(const Eigen::VectorXd& w) const {
    if (frozen) return Eigen::VectorXd::Zero(w.size());
    Controls gc;
    const Eigen::Map<const Controls> W(w.data(), c1.rows(), c1.cols());
    const SliceValue s = slice_quadratic(params, grid, c1, W, &gc, nullptr);
    require_regular(s, grid);
    return Eigen::Map<const Eigen::VectorXd>(gc.data(), gc.size());
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& w) const {
    return r0 + variation(w) - 2.0 * (M1 * w);
  }

  /// The variation term is quadratic in w, so central differences with unit
  /// steps give its Jacobian exactly.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& w) const {
    const Eigen::Index n = w.size();
    Eigen::MatrixXd J = -2.0 * M1;
    if (frozen) return J;
    Eigen::VectorXd e = w;
    for (Eigen::Index k = 0; k < n; ++k) {
      e[k] = w[k] + 1.0;
      const Eigen::VectorXd plus = variation(e);
      e[k] = w[k] - 1.0;
      const Eigen::VectorXd minus = variation(e);
      e[k] = w[k];
      J.col(k) += 0.5 * (plus - minus);
    }
    return J;
  }

  /// Size of the terms entering the residual, for its roundoff floor.
  double scale(const Eigen::VectorXd& w) const {
    return r0.cwiseAbs().maxCoeff() + (2.0 * (M1 * w)).cwiseAbs().maxCoeff() +
           variation(w).cwiseAbs().maxCoeff();
  }
};

inline StepSystem make_step_system(const MetricParams& params, const QuadratureGrid& grid,
                                   const Curve& c0, const Curve& c1, bool frozen) {
  Controls g0;
  const SliceValue s0 =
      slice_quadratic(params, grid, c0.controls(), c1.controls() - c0.controls(), nullptr, &g0);
  require_regular(s0, grid);
  const Curve& base = frozen ? c0 : c1;
  StepSystem sys{params, grid, c1.controls(),
                 Eigen::Map<const Eigen::VectorXd>(g0.data(), g0.size()),
                 metric_matrix(params, base, grid), frozen};
  return sys;
}

}  // namespace detail

/// Residual of the discrete geodesic equation at c1 for the triple
/// (c0, c1, c2), as an N x d array.
inline Controls stationarity_residual(const MetricParams& params, const Curve& c0, const Curve& c1,
                                      const Curve& c2, const ExpStepOptions& options = {}) {
  if (!same_basis(c0, c1) || !same_basis(c1, c2)) {
    throw InvalidArgument("curves of a discrete path must share one basis");
  }
  const QuadratureGrid grid = step_grid(c0, options.space_points);
  const auto sys = detail::make_step_system(params, grid, c0, c1, options.frozen_metric);
  const Controls w = c2.controls() - c1.controls();
  const Eigen::VectorXd r = sys.residual(Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()));
  return Eigen::Map<const Controls>(r.data(), w.rows(), w.cols());
}

/// Solves the discrete geodesic equation for c2 given (c0, c1), i.e. the c2
/// for which c1 minimizes E2(c0, ., c2). Newton's method with a
/// residual-norm line search, started from the flat guess 2 c1 - c0.
inline Curve discrete_exp_step(const MetricParams& params, const Curve& c0, const Curve& c1,
                               const ExpStepOptions& options = {}) {
  if (!same_basis(c0, c1)) throw InvalidArgument("curves of a discrete path must share one basis");
  const QuadratureGrid grid = step_grid(c0, options.space_points);
  const auto sys = detail::make_step_system(params, grid, c0, c1, options.frozen_metric);
  const Controls d0 = c1.controls() - c0.controls();
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(d0.data(), d0.size());
  Eigen::VectorXd r = sys.residual(w);
  double rn = r.cwiseAbs().maxCoeff();
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t it = 0; rn > options.tolerance; ++it) {
    if (it >= options.max_iterations) {
      throw StepFailure(0, "Newton did not converge (residual " + std::to_string(rn) + ")");
    }
    const Eigen::MatrixXd J = sys.jacobian(w);
    const Eigen::VectorXd delta = J.completeOrthogonalDecomposition().solve(-r);
    double t = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Eigen::VectorXd trial = w + t * delta;
      Eigen::VectorXd rt;
      try {
        rt = sys.residual(trial);
      } catch (const DegenerateCurve&) {
        continue;
      }
      const double tn = rt.cwiseAbs().maxCoeff();
      if (tn < rn) {
        w = trial;
        r = std::move(rt);
        rn = tn;
        improved = true;
        break;
      }
    }
    if (!improved) {
      // accept a residual at the roundoff level of its own terms
      if (rn <= 1e3 * eps * sys.scale(w)) break;
      throw StepFailure(0, "Newton line search stalled (residual " + std::to_string(rn) + ")");
    }
  }
  Controls c2 = c1.controls() + Eigen::Map<const Controls>(w.data(), d0.rows(), d0.cols());
  return Curve(c1.basis(), std::move(c2));
}

/// Number of steps used when none is given: 10 per unit G_c0-norm of v, at
/// least 5.
inline std::size_t default_exp_steps(const MetricParams& params, const Curve& c0,
                                     const TangentVector& v) {
  const double n = metric_norm(params, c0, v);
  return std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(10.0 * n)));
}

/// K-step discrete exponential map: c1 = c0 + v / K, then K - 1 steps.
inline DiscreteGeodesic exp_map(const MetricParams& params, const Curve& c0, const TangentVector& v,
                                std::size_t steps = 0, const ExpStepOptions& options = {}) {
  if (!same_basis(c0, v)) throw InvalidArgument("tangent vector lives on another basis");
  if (steps == 0) steps = default_exp_steps(params, c0, v);
  DiscreteGeodesic out;
  out.params = params;
  out.curves.reserve(steps + 1);
  out.curves.push_back(c0);
  out.curves.push_back(c0 + v * (1.0 / static_cast<double>(steps)));
  for (std::size_t k = 1; k < steps; ++k) {
    try {
      out.curves.push_back(discrete_exp_step(params, out.curves[k - 1], out.curves[k], options));
    } catch (const StepFailure& e) {
      throw StepFailure(k, e.what());
    } catch (const DegenerateCurve&) {
      throw StepFailure(k, "curve became degenerate");
    }
  }
  return out;
}

struct LogResult {
  TangentVector velocity;
  GeodesicResult geodesic;
};

/// Initial velocity of the clamped time spline at t = 0.
inline TangentVector initial_velocity(const Path& path) {
  const KnotVector& tb = path.time_basis();
  const auto& u = tb.knots();
  const int p = tb.degree();
  const double factor = p / (u[static_cast<std::size_t>(p) + 1] - u[1]);
  const auto N = static_cast<Eigen::Index>(path.ntheta());
  Controls v = factor * (path.controls().middleRows(N, N) - path.controls().topRows(N));
  return TangentVector(path.space_basis(), std::move(v));
}

/// Log_c0 c1 from the boundary value geodesic. Throws ConvergenceFailure
/// when the solver does not converge.
inline LogResult log_map_full(const MetricParams& params, const Curve& c0, const Curve& c1,
                              const BvpOptions& options = {}) {
  GeodesicResult g = solve_bvp({c0, c1, params, options});
  if (!g.converged) {
    throw ConvergenceFailure("geodesic boundary value solve did not converge: " + g.reason);
  }
  TangentVector v = initial_velocity(g.path);
  return {std::move(v), std::move(g)};
}

inline TangentVector log_map(const MetricParams& params, const Curve& c0, const Curve& c1,
                             const BvpOptions& options = {}) {
  return log_map_full(params, c0, c1, options).velocity;
}

}  // namespace curvematch
