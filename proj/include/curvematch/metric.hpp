#pragma once

// Second order Sobolev metrics on closed curves (constant and length-weighted
// coefficients), the planar elastic metric, curve length, and the energy,
// length and energy gradient of tensor-product spline paths.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvematch/errors.hpp"
#include "curvematch/splines.hpp"

namespace curvematch {

enum class Variant { constant, scale_invariant };

struct ElasticCoefficients {
  double a = 1.0;  ///< weight of the normal (bending) part
  double b = 0.5;  ///< weight of the tangential (stretching) part
};

/// Coefficients of the metric
///   G_c(h,k) = int a0 <h,k> + a1 <D_s h, D_s k> + a2 <D_s^2 h, D_s^2 k> ds,
/// optionally length weighted (a0/l^3, a1/l, a2*l), or the elastic metric
///   int a^2 <D_s h,n><D_s k,n> + b^2 <D_s h,v><D_s k,v> ds
/// when `elastic` is set.
struct MetricParams {
  double a0 = 1.0;
  double a1 = 1.0;
  double a2 = 1.0;
  Variant variant = Variant::constant;
  std::optional<ElasticCoefficients> elastic;
  /// Accept a0 == 0 or a2 == 0. First order metrics have geodesic equations
  /// that are only locally well-posed, which validate() reports as a warning.
  bool allow_degenerate = false;

  static MetricParams sobolev(double a0, double a1, double a2,
                              Variant variant = Variant::constant) {
    MetricParams p;
    p.a0 = a0;
    p.a1 = a1;
    p.a2 = a2;
    p.variant = variant;
    return p;
  }

  static MetricParams elastic_metric(double a, double b) {
    MetricParams p;
    p.elastic = ElasticCoefficients{a, b};
    p.a0 = p.a1 = p.a2 = 0.0;
    p.allow_degenerate = true;
    return p;
  }

  bool is_elastic() const noexcept { return elastic.has_value(); }

  /// Throws InvalidArgument for unusable coefficients; returns warnings.
  std::vector<std::string> validate() const {
    std::vector<std::string> warnings;
    if (elastic) {
      if (!std::isfinite(elastic->a) || !std::isfinite(elastic->b)) {
        throw InvalidArgument("elastic coefficients must be finite");
      }
      warnings.emplace_back("elastic metrics have no L2 part and are degenerate along translations");
      return warnings;
    }
    auto bad = [](double x) { return !std::isfinite(x) || x < 0.0; };
    if (bad(a0) || bad(a1) || bad(a2)) {
      throw InvalidArgument("metric coefficients must be finite and nonnegative");
    }
    if (a0 <= 0.0 || a2 <= 0.0) {
      if (!allow_degenerate) {
        throw InvalidArgument("second order Sobolev metrics need a0 > 0 and a2 > 0");
      }
      if (a2 <= 0.0) {
        warnings.emplace_back(
            "a2 = 0 gives a first order metric: its geodesic equation is locally, but not "
            "globally, well-posed");
      }
      if (a0 <= 0.0) warnings.emplace_back("a0 = 0: the metric is degenerate along translations");
    }
    return warnings;
  }
};

/// Split of a path energy into its L2, H1 and H2 parts. For Sobolev metrics
/// total == a0*e_l2 + a1*e_h1 + a2*e_h2; for length-weighted variants the
/// parts already carry the length powers. Elastic energies are reported
/// entirely in e_h1 with total == e_h1.
struct EnergyBreakdown {
  double e_l2 = 0.0;
  double e_h1 = 0.0;
  double e_h2 = 0.0;
  double total = 0.0;

  EnergyBreakdown& operator+=(const EnergyBreakdown& o) {
    e_l2 += o.e_l2;
    e_h1 += o.e_h1;
    e_h2 += o.e_h2;
    total += o.total;
    return *this;
  }
};

namespace detail {

/// Regularity threshold on |c_theta|.
inline double speed_threshold(const QuadratureGrid& grid) { return 1e-12 * grid.interval_length(); }

/// Quadratic form G_c(v, v) over one curve with its L2/H1/H2 split.
struct SliceValue {
  double l2 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double total = 0.0;
  double length = 0.0;
  std::ptrdiff_t bad_node = -1;  ///< degenerate node, -1 if regular
};

using ConstControlsRef = Eigen::Ref<const Controls>;

/// Evaluates G_P(V, V) by quadrature, where P are curve controls and V field
/// controls in the grid's basis. When grad_curve / grad_field are given they
/// receive dG/dP and dG/dV. Degeneracy is reported through bad_node rather
/// than thrown, so optimizers can reject the point.
inline SliceValue slice_quadratic(const MetricParams& params, const QuadratureGrid& grid,
                                  const ConstControlsRef& P, const ConstControlsRef& V,
                                  Controls* grad_curve = nullptr, Controls* grad_field = nullptr) {
  const int d = static_cast<int>(P.cols());
  const Eigen::Index nq = static_cast<Eigen::Index>(grid.size());
  const Controls p = grid.basis(1) * P;
  const Controls q = grid.basis(2) * P;
  const Controls v = grid.basis(0) * V;
  const Controls vp = grid.basis(1) * V;
  const Controls vq = grid.basis(2) * V;
  const auto w = grid.weights();
  const double threshold = speed_threshold(grid);
  const bool elastic = params.elastic.has_value();
  if (elastic && d != 2) throw UnsupportedDimension(d, "the elastic metric");

  SliceValue out;
  Eigen::VectorXd speed(nq);
  for (Eigen::Index i = 0; i < nq; ++i) {
    speed[i] = p.row(i).norm();
    if (!(speed[i] >= threshold)) {
      out.bad_node = i;
      out.total = std::numeric_limits<double>::infinity();
      return out;
    }
  }

  const bool want_grad = grad_curve != nullptr || grad_field != nullptr;
  Controls gp, gq, gv, gvp, gvq;
  if (want_grad) {
    gp = Controls::Zero(nq, d);
    gq = Controls::Zero(nq, d);
    gv = Controls::Zero(nq, d);
    gvp = Controls::Zero(nq, d);
    gvq = Controls::Zero(nq, d);
  }

  if (elastic) {
    const double a2 = params.elastic->a * params.elastic->a;
    const double b2 = params.elastic->b * params.elastic->b;
    double total = 0.0, length = 0.0;
    for (Eigen::Index i = 0; i < nq; ++i) {
      const double s = speed[i];
      const double px = p(i, 0), py = p(i, 1);
      const double ux = vp(i, 0), uy = vp(i, 1);
      const double alpha = -ux * py + uy * px;  // <vp, J p>, J = +pi/2 rotation
      const double beta = ux * px + uy * py;    // <vp, p>
      const double s3 = s * s * s;
      const double fe = (a2 * alpha * alpha + b2 * beta * beta) / s3;
      total += w[i] * fe;
      length += w[i] * s;
      if (want_grad) {
        // d alpha/dp = -J vp = (uy, -ux); d alpha/dvp = J p = (-py, px)
        gvp(i, 0) = w[i] * (2.0 * a2 * alpha * (-py) + 2.0 * b2 * beta * px) / s3;
        gvp(i, 1) = w[i] * (2.0 * a2 * alpha * px + 2.0 * b2 * beta * py) / s3;
        gp(i, 0) = w[i] * ((2.0 * a2 * alpha * uy + 2.0 * b2 * beta * ux) / s3 -
                           3.0 * fe * px / (s * s));
        gp(i, 1) = w[i] * ((2.0 * a2 * alpha * (-ux) + 2.0 * b2 * beta * uy) / s3 -
                           3.0 * fe * py / (s * s));
      }
    }
    out.h1 = total;
    out.total = total;
    out.length = length;
  } else {
    double A = 0.0, B = 0.0, C = 0.0, length = 0.0;
    // per-node partials of the three unweighted densities
    Controls dAp, dBp, dCp, dCq, dAv, dBvp, dCvp, dCvq;
    if (want_grad) {
      dAp = dBp = dCp = dCq = dAv = dBvp = dCvp = dCvq = Controls::Zero(nq, d);
    }
    for (Eigen::Index i = 0; i < nq; ++i) {
      const double s = speed[i];
      const auto pi = p.row(i);
      const auto qi = q.row(i);
      const double sigma = pi.dot(qi);
      const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2, s6 = s4 * s2;
      const Point wv = (vq.row(i) / s2 - vp.row(i) * (sigma / s4)).transpose();
      const double vv = v.row(i).squaredNorm();
      const double vpvp = vp.row(i).squaredNorm();
      const double ww = wv.squaredNorm();
      A += w[i] * s * vv;
      B += w[i] * vpvp / s;
      C += w[i] * s * ww;
      length += w[i] * s;
      if (want_grad) {
        dAp.row(i) = w[i] * (vv / s) * pi;
        dAv.row(i) = w[i] * 2.0 * s * v.row(i);
        dBp.row(i) = -w[i] * (vpvp / s3) * pi;
        dBvp.row(i) = w[i] * (2.0 / s) * vp.row(i);
        const double wvq = wv.dot(vq.row(i).transpose());
        const double wvp = wv.dot(vp.row(i).transpose());
        dCvq.row(i) = w[i] * (2.0 / s) * wv.transpose();
        dCvp.row(i) = -w[i] * (2.0 * sigma / s3) * wv.transpose();
        dCq.row(i) = -w[i] * (2.0 * wvp / s3) * pi;
        dCp.row(i) = w[i] * ((ww / s + 2.0 * s * (-2.0 * wvq / s4 + 4.0 * sigma * wvp / s6)) * pi -
                             (2.0 * wvp / s3) * qi);
      }
    }
    double c0 = params.a0, c1 = params.a1, c2 = params.a2;
    double wl2 = 1.0, wh1 = 1.0, wh2 = 1.0;
    if (params.variant == Variant::scale_invariant) {
      wl2 = 1.0 / (length * length * length);
      wh1 = 1.0 / length;
      wh2 = length;
    }
    out.l2 = wl2 * A;
    out.h1 = wh1 * B;
    out.h2 = wh2 * C;
    out.total = c0 * out.l2 + c1 * out.h1 + c2 * out.h2;
    out.length = length;
    if (want_grad) {
      gp = c0 * wl2 * dAp + c1 * wh1 * dBp + c2 * wh2 * dCp;
      gq = c2 * wh2 * dCq;
      gv = c0 * wl2 * dAv;
      gvp = c1 * wh1 * dBvp + c2 * wh2 * dCvp;
      gvq = c2 * wh2 * dCvq;
      if (params.variant == Variant::scale_invariant) {
        const double dl = -3.0 * c0 * A / (length * length * length * length) -
                          c1 * B / (length * length) + c2 * C;
        for (Eigen::Index i = 0; i < nq; ++i) gp.row(i) += dl * w[i] * p.row(i) / speed[i];
      }
    }
  }

  if (grad_curve) {
    *grad_curve = grid.basis(1).transpose() * gp + grid.basis(2).transpose() * gq;
  }
  if (grad_field) {
    *grad_field = grid.basis(0).transpose() * gv + grid.basis(1).transpose() * gvp +
                  grid.basis(2).transpose() * gvq;
  }
  return out;
}

inline void require_regular(const SliceValue& v, const QuadratureGrid& grid) {
  if (v.bad_node >= 0) {
    const auto i = static_cast<std::size_t>(v.bad_node);
    throw DegenerateCurve(i, grid.nodes()[i]);
  }
}

inline void require_grid(const Curve& c, const QuadratureGrid& grid) {
  if (!(c.basis() == grid.knots())) throw InvalidArgument("quadrature grid built on another basis");
}

}  // namespace detail

/// Length of a closed curve by quadrature of |c_theta|.
inline double curve_length(const Curve& c, const QuadratureGrid& grid) {
  detail::require_grid(c, grid);
  const Controls p = grid.basis(1) * c.controls();
  const double threshold = detail::speed_threshold(grid);
  double length = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double s = p.row(i).norm();
    if (!(s >= threshold)) throw DegenerateCurve(static_cast<std::size_t>(i), grid.nodes()[i]);
    length += grid.weights()[i] * s;
  }
  return length;
}

inline double curve_length(const Curve& c) { return curve_length(c, default_grid(c.basis())); }

/// G_c(h, k) for Sobolev or elastic metrics.
inline double metric_eval(const MetricParams& params, const Curve& c, const TangentVector& h,
                          const TangentVector& k, const QuadratureGrid& grid) {
  if (!same_basis(c, h) || !same_basis(c, k)) {
    throw InvalidArgument("tangent vectors must share the curve's basis");
  }
  detail::require_grid(c, grid);
  const int d = c.dim();
  const Eigen::Index nq = static_cast<Eigen::Index>(grid.size());
  const Controls p = grid.basis(1) * c.controls();
  const Controls q = grid.basis(2) * c.controls();
  const Controls h0 = grid.basis(0) * h.controls(), k0 = grid.basis(0) * k.controls();
  const Controls h1 = grid.basis(1) * h.controls(), k1 = grid.basis(1) * k.controls();
  const Controls h2 = grid.basis(2) * h.controls(), k2 = grid.basis(2) * k.controls();
  const auto w = grid.weights();
  const double threshold = detail::speed_threshold(grid);

  Eigen::VectorXd speed(nq);
  for (Eigen::Index i = 0; i < nq; ++i) {
    speed[i] = p.row(i).norm();
    if (!(speed[i] >= threshold)) throw DegenerateCurve(static_cast<std::size_t>(i), grid.nodes()[i]);
  }

  if (params.elastic) {
    if (d != 2) throw UnsupportedDimension(d, "the elastic metric");
    const double a2 = params.elastic->a * params.elastic->a;
    const double b2 = params.elastic->b * params.elastic->b;
    double total = 0.0;
    for (Eigen::Index i = 0; i < nq; ++i) {
      const double s = speed[i];
      const double vx = p(i, 0) / s, vy = p(i, 1) / s;  // unit tangent
      const double nx = -vy, ny = vx;                    // unit normal
      const double dhn = (h1(i, 0) * nx + h1(i, 1) * ny) / s;
      const double dkn = (k1(i, 0) * nx + k1(i, 1) * ny) / s;
      const double dhv = (h1(i, 0) * vx + h1(i, 1) * vy) / s;
      const double dkv = (k1(i, 0) * vx + k1(i, 1) * vy) / s;
      total += w[i] * s * (a2 * dhn * dkn + b2 * dhv * dkv);
    }
    return total;
  }

  double A = 0.0, B = 0.0, C = 0.0, length = 0.0;
  for (Eigen::Index i = 0; i < nq; ++i) {
    const double s = speed[i];
    const double sigma = p.row(i).dot(q.row(i));
    const double s2 = s * s, s4 = s2 * s2;
    A += w[i] * s * h0.row(i).dot(k0.row(i));
    B += w[i] * h1.row(i).dot(k1.row(i)) / s;
    const Point dh = (h2.row(i) / s2 - h1.row(i) * (sigma / s4)).transpose();
    const Point dk = (k2.row(i) / s2 - k1.row(i) * (sigma / s4)).transpose();
    C += w[i] * s * dh.dot(dk);
    length += w[i] * s;
  }
  if (params.variant == Variant::scale_invariant) {
    return params.a0 * A / (length * length * length) + params.a1 * B / length +
           params.a2 * C * length;
  }
  return params.a0 * A + params.a1 * B + params.a2 * C;
}

inline double metric_eval(const MetricParams& params, const Curve& c, const TangentVector& h,
                          const TangentVector& k) {
  return metric_eval(params, c, h, k, default_grid(c.basis()));
}

/// Elastic metric with coefficients (a, b); planar curves only.
inline double elastic_metric_eval(double a, double b, const Curve& c, const TangentVector& h,
                                  const TangentVector& k, const QuadratureGrid& grid) {
  if (c.dim() != 2) throw UnsupportedDimension(c.dim(), "the elastic metric");
  return metric_eval(MetricParams::elastic_metric(a, b), c, h, k, grid);
}

inline double metric_norm(const MetricParams& params, const Curve& c, const TangentVector& h,
                          const QuadratureGrid& grid) {
  return std::sqrt(std::max(0.0, metric_eval(params, c, h, h, grid)));
}

inline double metric_norm(const MetricParams& params, const Curve& c, const TangentVector& h) {
  return metric_norm(params, c, h, default_grid(c.basis()));
}

/// Gram matrix of G_c on the flattened control space: entry (j*d + a,
/// l*d + b) is G_c(e_{j,a}, e_{l,b}) for the unit fields e_{j,a} that put a 1
/// in coordinate a of control j.
inline Eigen::MatrixXd metric_matrix(const MetricParams& params, const Curve& c,
                                     const QuadratureGrid& grid) {
  detail::require_grid(c, grid);
  const int d = c.dim();
  const auto nb = static_cast<Eigen::Index>(c.size());
  const Eigen::Index nq = static_cast<Eigen::Index>(grid.size());
  const Controls p = grid.basis(1) * c.controls();
  const Controls q = grid.basis(2) * c.controls();
  const auto w = grid.weights();
  const double threshold = detail::speed_threshold(grid);
  const Eigen::MatrixXd& B0 = grid.basis(0);
  const Eigen::MatrixXd& B1 = grid.basis(1);
  const Eigen::MatrixXd& B2 = grid.basis(2);

  Eigen::VectorXd speed(nq), sigma(nq);
  for (Eigen::Index i = 0; i < nq; ++i) {
    speed[i] = p.row(i).norm();
    sigma[i] = p.row(i).dot(q.row(i));
    if (!(speed[i] >= threshold)) throw DegenerateCurve(static_cast<std::size_t>(i), grid.nodes()[i]);
  }
  const double length = grid.weight_vector().dot(speed);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb * d, nb * d);
  if (params.elastic) {
    if (d != 2) throw UnsupportedDimension(d, "the elastic metric");
    const double a2 = params.elastic->a * params.elastic->a;
    const double b2 = params.elastic->b * params.elastic->b;
    for (Eigen::Index i = 0; i < nq; ++i) {
      const double s = speed[i];
      const Eigen::Vector2d v(p(i, 0) / s, p(i, 1) / s);
      const Eigen::Vector2d n(-v.y(), v.x());
      const Eigen::Matrix2d coord = a2 * n * n.transpose() + b2 * v * v.transpose();
      const Eigen::VectorXd row = B1.row(i).transpose();
      const Eigen::MatrixXd scalar = (w[i] / s) * row * row.transpose();
      for (Eigen::Index j = 0; j < nb; ++j) {
        for (Eigen::Index l = 0; l < nb; ++l) {
          M.block<2, 2>(j * 2, l * 2) += scalar(j, l) * coord;
        }
      }
    }
    return M;
  }

  double c0 = params.a0, c1 = params.a1, c2 = params.a2;
  if (params.variant == Variant::scale_invariant) {
    c0 /= length * length * length;
    c1 /= length;
    c2 *= length;
  }
  Eigen::MatrixXd scalar = Eigen::MatrixXd::Zero(nb, nb);
  for (Eigen::Index i = 0; i < nq; ++i) {
    const double s = speed[i];
    const Eigen::VectorXd e0 = B0.row(i).transpose();
    const Eigen::VectorXd e1 = B1.row(i).transpose();
    const Eigen::VectorXd e2 = B2.row(i).transpose() / (s * s) - e1 * (sigma[i] / (s * s * s * s));
    scalar.noalias() += (w[i] * s * c0) * e0 * e0.transpose();
    scalar.noalias() += (w[i] * c1 / s) * e1 * e1.transpose();
    scalar.noalias() += (w[i] * s * c2) * e2 * e2.transpose();
  }
  for (Eigen::Index j = 0; j < nb; ++j) {
    for (Eigen::Index l = 0; l < nb; ++l) {
      for (int a = 0; a < d; ++a) M(j * d + a, l * d + a) = scalar(j, l);
    }
  }
  return M;
}

/// Quadrature grids for a path: clamped in time, periodic in space.
struct PathGrids {
  QuadratureGrid time;
  QuadratureGrid space;

  static PathGrids for_path(const Path& path, int time_points = 0, int space_points = 0) {
    if (time_points <= 0) time_points = default_quadrature_points(path.time_basis().degree());
    if (space_points <= 0) space_points = default_quadrature_points(path.space_basis().degree());
    return {QuadratureGrid(path.time_basis(), time_points),
            QuadratureGrid(path.space_basis(), space_points)};
  }
};

namespace detail {

struct PathEvaluation {
  EnergyBreakdown energy;
  double length = 0.0;
  bool regular = true;
  double bad_t = 0.0;
  double bad_theta = 0.0;
};

/// Energy 1/2 int G_{c(t)}(c_t, c_t) dt of a path given by its full control
/// grid. `grad` (optional) receives the derivative with respect to every
/// control, boundary rows included.
inline PathEvaluation evaluate_path(const MetricParams& params, const PathGrids& grids,
                                    std::size_t nt, std::size_t ntheta, int dim,
                                    const double* controls, Controls* grad = nullptr) {
  using RowMat = Controls;
  const auto N = static_cast<Eigen::Index>(ntheta);
  const Eigen::Index width = N * dim;
  Eigen::Map<const RowMat> X(controls, static_cast<Eigen::Index>(nt), width);
  const RowMat P_all = grids.time.basis(0) * X;
  const RowMat V_all = grids.time.basis(1) * X;
  const auto u = grids.time.weights();
  const Eigen::Index nqt = static_cast<Eigen::Index>(grids.time.size());

  PathEvaluation out;
  RowMat gP_all, gV_all;
  if (grad) {
    gP_all = RowMat::Zero(nqt, width);
    gV_all = RowMat::Zero(nqt, width);
  }
  Controls gP, gV;
  for (Eigen::Index r = 0; r < nqt; ++r) {
    Eigen::Map<const RowMat> P(P_all.row(r).data(), N, dim);
    Eigen::Map<const RowMat> V(V_all.row(r).data(), N, dim);
    const SliceValue s = slice_quadratic(params, grids.space, P, V, grad ? &gP : nullptr,
                                         grad ? &gV : nullptr);
    if (s.bad_node >= 0) {
      out.regular = false;
      out.bad_t = grids.time.nodes()[static_cast<std::size_t>(r)];
      out.bad_theta = grids.space.nodes()[static_cast<std::size_t>(s.bad_node)];
      out.energy.total = std::numeric_limits<double>::infinity();
      return out;
    }
    const double half_w = 0.5 * u[static_cast<std::size_t>(r)];
    out.energy.e_l2 += half_w * s.l2;
    out.energy.e_h1 += half_w * s.h1;
    out.energy.e_h2 += half_w * s.h2;
    out.energy.total += half_w * s.total;
    out.length += u[static_cast<std::size_t>(r)] * std::sqrt(std::max(0.0, s.total));
    if (grad) {
      gP_all.row(r) = half_w * Eigen::Map<const Eigen::RowVectorXd>(gP.data(), width);
      gV_all.row(r) = half_w * Eigen::Map<const Eigen::RowVectorXd>(gV.data(), width);
    }
  }
  if (grad) {
    const RowMat G = grids.time.basis(0).transpose() * gP_all + grids.time.basis(1).transpose() * gV_all;
    *grad = Eigen::Map<const Controls>(G.data(), static_cast<Eigen::Index>(nt) * N, dim);
  }
  return out;
}

inline void require_path_grids(const Path& path, const PathGrids& grids) {
  if (!(path.time_basis() == grids.time.knots()) || !(path.space_basis() == grids.space.knots())) {
    throw InvalidArgument("quadrature grids built on other bases than the path's");
  }
}

inline PathEvaluation evaluate_path_checked(const MetricParams& params, const Path& path,
                                            const PathGrids& grids, Controls* grad = nullptr) {
  require_path_grids(path, grids);
  PathEvaluation e = evaluate_path(params, grids, path.nt(), path.ntheta(), path.dim(),
                                   path.controls().data(), grad);
  if (!e.regular) throw DegeneratePath(e.bad_t, e.bad_theta);
  return e;
}

}  // namespace detail

/// E(c) = 1/2 int_0^1 G_{c(t)}(c_t, c_t) dt with tensor-product quadrature.
inline EnergyBreakdown path_energy(const MetricParams& params, const Path& path,
                                   const PathGrids& grids) {
  return detail::evaluate_path_checked(params, path, grids).energy;
}

inline EnergyBreakdown path_energy(const MetricParams& params, const Path& path) {
  return path_energy(params, path, PathGrids::for_path(path));
}

/// Derivative of the discrete energy with respect to the interior control
/// rows 1..N_t-2, as an ((N_t-2)*N_theta) x d array.
inline Controls path_energy_gradient(const MetricParams& params, const Path& path,
                                     const PathGrids& grids) {
  Controls full;
  detail::evaluate_path_checked(params, path, grids, &full);
  const auto N = static_cast<Eigen::Index>(path.ntheta());
  const auto interior = static_cast<Eigen::Index>(path.nt()) - 2;
  if (interior <= 0) return Controls(0, path.dim());
  return full.middleRows(N, interior * N);
}

inline Controls path_energy_gradient(const MetricParams& params, const Path& path) {
  return path_energy_gradient(params, path, PathGrids::for_path(path));
}

/// L(c) = int_0^1 sqrt(G_{c(t)}(c_t, c_t)) dt.
inline double path_length(const MetricParams& params, const Path& path, const PathGrids& grids) {
  return detail::evaluate_path_checked(params, path, grids).length;
}

inline double path_length(const MetricParams& params, const Path& path) {
  return path_length(params, path, PathGrids::for_path(path));
}

}  // namespace curvematch
