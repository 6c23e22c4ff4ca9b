#pragma once

// Karcher (Frechet) mean of a set of curves by Riemannian gradient descent
// along discrete exponential-map rays.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "curvematch/errors.hpp"
#include "curvematch/geodesic_bvp.hpp"
#include "curvematch/geodesic_ivp.hpp"
#include "curvematch/metric.hpp"
#include "curvematch/parallel.hpp"
#include "curvematch/splines.hpp"

namespace curvematch {

enum class StepMethod { line_search, fixed_step };

struct KarcherOptions {
  BvpOptions bvp;
  ExpStepOptions exp;
  std::size_t exp_steps = 0;  ///< steps per exp_map ray, 0 = default rule
  double step = 1.0;          ///< initial (or fixed) step size tau
  double tolerance = 1e-3;    ///< on grad_norm
  std::size_t max_iterations = 100;
  std::size_t max_backtracks = 12;
  double armijo = 1e-4;
  StepMethod method = StepMethod::line_search;
  std::size_t jobs = 0;  ///< concurrent log solves, 0 = hardware threads
  std::optional<Curve> initial;
};

struct CurveTerm {
  double distance = 0.0;
  TangentVector velocity;
};

struct MeanResult {
  Curve mean;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<CurveTerm> per_curve;
  std::vector<double> objective_trace;  ///< F at every accepted iterate
};

namespace detail {

/// Log maps from c to every dataset curve, computed concurrently. Any
/// failure raises PartialResult listing the failed indices.
inline std::vector<CurveTerm> log_terms(const MetricParams& params, const Curve& c,
                                        const std::vector<Curve>& dataset,
                                        const BvpOptions& bvp, std::size_t jobs) {
  if (dataset.empty()) throw InvalidArgument("dataset is empty");
  const std::size_t n = dataset.size();
  std::vector<std::optional<CurveTerm>> slots(n);
  std::vector<std::string> messages(n);
  parallel_for(n, jobs, [&](std::size_t j) {
    try {
      LogResult r = log_map_full(params, c, dataset[j], bvp);
      slots[j] = CurveTerm{r.geodesic.distance, std::move(r.velocity)};
    } catch (const std::exception& e) {
      messages[j] = e.what();
    }
  });
  std::vector<std::size_t> failed;
  std::string summary;
  for (std::size_t j = 0; j < n; ++j) {
    if (!slots[j]) {
      failed.push_back(j);
      summary += (summary.empty() ? "" : "; ") + std::to_string(j) + ": " + messages[j];
    }
  }
  if (!failed.empty()) throw PartialResult(failed, "geodesic solves failed for curves " + summary);
  std::vector<CurveTerm> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline double objective_of(const std::vector<CurveTerm>& terms) {
  double f = 0.0;
  for (const auto& t : terms) f += t.distance * t.distance;
  return f / static_cast<double>(terms.size());
}

inline TangentVector mean_velocity(const Curve& c, const std::vector<CurveTerm>& terms) {
  TangentVector v = TangentVector::zero(c);
  for (const auto& t : terms) v += t.velocity;
  return v * (1.0 / static_cast<double>(terms.size()));
}

}  // namespace detail

/// F(c) = (1/n) sum_j dist(c, c_j)^2.
inline double karcher_energy(const MetricParams& params, const Curve& c,
                             const std::vector<Curve>& dataset, const KarcherOptions& options = {}) {
  return detail::objective_of(detail::log_terms(params, c, dataset, options.bvp, options.jobs));
}

/// (1/n) sum_j Log_c c_j. It points toward the data and is minus one half
/// of the G-gradient of F, so it is used directly as the descent direction.
inline TangentVector karcher_descent_direction(const MetricParams& params, const Curve& c,
                                               const std::vector<Curve>& dataset,
                                               const KarcherOptions& options = {}) {
  return detail::mean_velocity(c, detail::log_terms(params, c, dataset, options.bvp, options.jobs));
}

/// Index of the dataset curve with the smallest F, using each pairwise
/// distance once.
inline std::size_t best_initial_index(const MetricParams& params, const std::vector<Curve>& dataset,
                                      const KarcherOptions& options = {}) {
  const std::size_t n = dataset.size();
  if (n == 0) throw InvalidArgument("dataset is empty");
  if (n == 1) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> d2(pairs.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(pairs.size(), options.jobs, [&](std::size_t k) {
    try {
      const GeodesicResult r =
          solve_bvp({dataset[pairs[k].first], dataset[pairs[k].second], params, options.bvp});
      if (r.converged) d2[k] = r.distance * r.distance;
    } catch (const Error&) {
    }
  });
  std::vector<double> F(n, 0.0);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (std::isnan(d2[k])) {
      F[pairs[k].first] = F[pairs[k].second] = std::numeric_limits<double>::infinity();
      continue;
    }
    F[pairs[k].first] += d2[k];
    F[pairs[k].second] += d2[k];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (F[i] < F[best]) best = i;
  }
  if (!std::isfinite(F[best])) throw DegenerateDataset("no dataset curve reaches all others");
  return best;
}

/// Gradient descent c <- Exp_c(tau * direction) with Armijo backtracking
/// (or a fixed step), until the G-norm of the direction drops below the
/// tolerance.
inline MeanResult karcher_mean(const MetricParams& params, const std::vector<Curve>& dataset,
                               const KarcherOptions& options = {}) {
  if (dataset.empty()) throw InvalidArgument("dataset is empty");
  for (const auto& c : dataset) {
    if (!same_basis(dataset.front(), c)) throw InvalidArgument("dataset curves use different bases");
  }
  MeanResult out;
  Curve c = options.initial ? *options.initial
                            : dataset[best_initial_index(params, dataset, options)];
  std::vector<CurveTerm> terms = detail::log_terms(params, c, dataset, options.bvp, options.jobs);
  double F = detail::objective_of(terms);
  TangentVector dir = detail::mean_velocity(c, terms);
  double gnorm = metric_norm(params, c, dir);
  out.objective_trace.push_back(F);

  // best iterate so far, which fixed steps may leave
  Curve best_c = c;
  std::vector<CurveTerm> best_terms = terms;
  double best_F = F, best_g = gnorm;

  std::size_t it = 0;
  bool converged = gnorm < options.tolerance;
  for (; !converged && it < options.max_iterations; ++it) {
    double tau = options.step;
    bool accepted = false;
    const std::size_t tries = options.method == StepMethod::fixed_step ? 1 : options.max_backtracks;
    for (std::size_t b = 0; b < tries && !accepted; ++b, tau *= 0.5) {
      try {
        const TangentVector v = dir * tau;
        const std::size_t K =
            options.exp_steps > 0 ? options.exp_steps : default_exp_steps(params, c, v);
        Curve next = exp_map(params, c, v, K, options.exp).curves.back();
        std::vector<CurveTerm> next_terms =
            detail::log_terms(params, next, dataset, options.bvp, options.jobs);
        const double F_next = detail::objective_of(next_terms);
        const bool armijo = F_next <= F - options.armijo * tau * 2.0 * gnorm * gnorm;
        if (options.method == StepMethod::fixed_step || armijo) {
          c = std::move(next);
          terms = std::move(next_terms);
          F = F_next;
          accepted = true;
        }
      } catch (const Error&) {
        // failed ray or failed log solve: shorten the step
      }
    }
    if (!accepted) break;
    dir = detail::mean_velocity(c, terms);
    gnorm = metric_norm(params, c, dir);
    out.objective_trace.push_back(F);
    if (F < best_F || options.method == StepMethod::line_search) {
      best_c = c;
      best_terms = terms;
      best_F = F;
      best_g = gnorm;
    }
    converged = gnorm < options.tolerance;
  }
  if (converged && !(best_c.controls() == c.controls())) {
    best_c = c;
    best_terms = terms;
    best_F = F;
    best_g = gnorm;
  }
  out.mean = std::move(best_c);
  out.objective = best_F;
  out.grad_norm = best_g;
  out.iterations = it;
  out.converged = best_g < options.tolerance;
  out.per_curve = std::move(best_terms);
  return out;
}

}  // namespace curvematch
