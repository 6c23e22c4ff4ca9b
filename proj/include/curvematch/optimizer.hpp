#pragma once

// Dense BFGS with a strong-Wolfe line search. The objective may return +inf
// for infeasible points (degenerate curves); the line search backtracks from
// them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace curvematch {

struct MinimizeOptions {
  double gradient_tolerance = 1e-6;  ///< on the max-norm of the gradient
  double step_tolerance = 0.0;  ///< stop once max |dx| <= tol * (1 + max |x|)
  std::size_t max_iterations = 5000;
  std::size_t max_line_search = 40;
  double armijo = 1e-4;
  double curvature = 0.9;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  Eigen::VectorXd gradient;
  double value = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();  ///< max-norm
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string reason;
  std::vector<double> trace;  ///< objective value of every accepted iterate
};

namespace detail {

/// Minimizer of the cubic through (a, fa, ga) and (b, fb, gb), safeguarded
/// into the inner part of [a, b].
inline double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  double t = 0.5 * (a + b);
  if (std::isfinite(fb) && std::isfinite(gb)) {
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), b - a);
      const double denom = gb - ga + 2.0 * d2;
      if (denom != 0.0) t = b - (b - a) * (gb + d2 - d1) / denom;
    }
  } else {
    // no information beyond a: quadratic from (fa, ga) would need fb; bisect
    t = a + 0.5 * (b - a);
  }
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
  return t;
}

}  // namespace detail

/// Minimizes f starting from x0. `objective(x, grad)` returns f(x) and
/// writes the gradient. `inverse_hessian` seeds the BFGS approximation.
template <typename Objective>
MinimizeResult minimize_bfgs(Objective&& objective, Eigen::VectorXd x0,
                             const Eigen::MatrixXd& inverse_hessian,
                             const MinimizeOptions& options = {}) {
  const Eigen::Index n = x0.size();
  MinimizeResult out;
  out.x = std::move(x0);
  out.gradient = Eigen::VectorXd::Zero(n);
  out.value = objective(out.x, out.gradient);
  ++out.evaluations;
  if (!std::isfinite(out.value)) {
    out.reason = "objective is not finite at the starting point";
    return out;
  }
  out.trace.push_back(out.value);
  out.gradient_norm = n == 0 ? 0.0 : out.gradient.cwiseAbs().maxCoeff();
  if (out.gradient_norm <= options.gradient_tolerance) {
    out.converged = true;
    out.reason = "gradient tolerance";
    return out;
  }

  Eigen::MatrixXd H = inverse_hessian;
  Eigen::VectorXd x_new(n), g_new(n), direction(n);
  bool fresh = true;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    direction = -H * out.gradient;
    double slope = direction.dot(out.gradient);
    if (!(slope < 0.0)) {
      H = inverse_hessian;
      direction = -H * out.gradient;
      slope = direction.dot(out.gradient);
      fresh = true;
      if (!(slope < 0.0)) {
        out.reason = "seed inverse Hessian is not positive definite";
        return out;
      }
    }

    // strong Wolfe line search (Nocedal & Wright, algorithms 3.5 and 3.6)
    const double f0 = out.value;
    double step = 1.0;
    double prev_step = 0.0, prev_f = f0, prev_slope = slope;
    bool accepted = false;
    double f_new = 0.0;
    // Within roundoff of f0 the values carry no information; the slope then
    // decides (approximate Wolfe conditions of Hager and Zhang).
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(f0);
    auto approx_wolfe = [&](double f, double s) {
      return std::isfinite(f) && std::abs(f - f0) <= noise && s >= options.curvature * slope &&
             s <= -0.8 * slope;
    };
    // lowest non-increasing point seen, for when Armijo is lost in roundoff
    double best_step = 0.0, best_f = f0;
    auto eval = [&](double a) {
      x_new = out.x + a * direction;
      const double f = objective(x_new, g_new);
      ++out.evaluations;
      if (f <= best_f) {
        best_f = f;
        best_step = a;
      }
      return f;
    };
    auto zoom = [&](double lo, double f_lo, double s_lo, double hi, double f_hi, double s_hi) {
      for (std::size_t k = 0; k < options.max_line_search; ++k) {
        const double a = detail::cubic_step(lo, f_lo, s_lo, hi, f_hi, s_hi);
        const double f = eval(a);
        const double s = std::isfinite(f) ? g_new.dot(direction) : std::numeric_limits<double>::quiet_NaN();
        if (approx_wolfe(f, s)) {
          f_new = f;
          return true;
        }
        if (!std::isfinite(f) || f > f0 + options.armijo * a * slope || f >= f_lo) {
          hi = a;
          f_hi = f;
          s_hi = s;
        } else {
          if (std::abs(s) <= -options.curvature * slope) {
            f_new = f;
            return true;
          }
          if (s * (hi - lo) >= 0.0) {
            hi = lo;
            f_hi = f_lo;
            s_hi = s_lo;
          }
          lo = a;
          f_lo = f;
          s_lo = s;
        }
        if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
      }
      // accept the best sufficient-decrease point seen if any
      if (lo > 0.0 && f_lo < f0 + options.armijo * lo * slope) {
        f_new = eval(lo);
        return std::isfinite(f_new);
      }
      return false;
    };

    for (std::size_t k = 0; k < options.max_line_search; ++k) {
      const double f = eval(step);
      const double s = std::isfinite(f) ? g_new.dot(direction) : std::numeric_limits<double>::quiet_NaN();
      if (approx_wolfe(f, s)) {
        f_new = f;
        accepted = true;
        break;
      }
      if (!std::isfinite(f) || f > f0 + options.armijo * step * slope || (k > 0 && f >= prev_f)) {
        accepted = zoom(prev_step, prev_f, prev_slope, step, f, s);
        break;
      }
      if (std::abs(s) <= -options.curvature * slope) {
        f_new = f;
        accepted = true;
        break;
      }
      if (s >= 0.0) {
        accepted = zoom(step, f, s, prev_step, prev_f, prev_slope);
        break;
      }
      prev_step = step;
      prev_f = f;
      prev_slope = s;
      step *= 2.0;
    }

    if (!accepted && best_step > 0.0) {
      f_new = eval(best_step);
      accepted = f_new <= f0;
    }
    if (!accepted || !(f_new <= f0 + noise)) {
      if (!fresh) {
        H = inverse_hessian;
        fresh = true;
        continue;
      }
      out.reason = "line search failed";
      out.iterations = iter;
      return out;
    }

    const Eigen::VectorXd s_vec = x_new - out.x;
    const Eigen::VectorXd y_vec = g_new - out.gradient;
    out.x = x_new;
    out.gradient = g_new;
    out.value = f_new;
    out.trace.push_back(f_new);
    out.iterations = iter + 1;
    out.gradient_norm = out.gradient.cwiseAbs().maxCoeff();
    if (out.gradient_norm <= options.gradient_tolerance) {
      out.converged = true;
      out.reason = "gradient tolerance";
      return out;
    }
    if (s_vec.cwiseAbs().maxCoeff() <= options.step_tolerance * (1.0 + out.x.cwiseAbs().maxCoeff())) {
      out.reason = "step tolerance";
      return out;
    }

    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-14 * s_vec.norm() * y_vec.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y_vec;
      const double yHy = y_vec.dot(Hy);
      H.noalias() -= rho * (Hy * s_vec.transpose() + s_vec * Hy.transpose());
      H.noalias() += (rho * rho * yHy + rho) * (s_vec * s_vec.transpose());
      fresh = false;
    }
  }
  out.reason = "iteration limit";
  return out;
}

}  // namespace curvematch
