#pragma once

// Periodic and clamped uniform B-spline bases, closed spline curves, tensor
// product paths of curves, Gauss-Legendre quadrature grids and least-squares
// fitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curvematch/errors.hpp"

namespace curvematch {

/// Row-major control storage: one control point per row, one coordinate
/// per column. Row-major keeps a whole control net contiguous, so the same
/// buffer doubles as a flat optimization vector.
using Controls = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Point in R^d, d <= 3, without heap allocation.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr int max_dim = 3;

enum class KnotKind { periodic, clamped };

/// Uniform knot sequence.
///
/// Periodic kind: knots 2*pi*(j - n)/N for 0 <= j <= N + 2n, so that the N
/// intervals of the domain tile [0, 2*pi]. There are N + n extended basis
/// functions; extended function e acts on control e mod N.
///
/// Clamped kind: degree + 1 copies of 0 and of 1 with N - n - 1 uniform
/// interior knots, giving N basis functions on [0, 1].
class KnotVector {
 public:
  KnotVector() = default;

  KnotVector(std::size_t count, int degree, KnotKind kind)
      : count_(count), degree_(degree), kind_(kind) {
    if (degree < 0) throw InvalidArgument("spline degree must be nonnegative");
    if (count < static_cast<std::size_t>(degree) + 1) {
      throw InvalidArgument("knot vector needs count >= degree + 1 (count=" +
                            std::to_string(count) + ", degree=" + std::to_string(degree) + ")");
    }
    const auto n = static_cast<std::size_t>(degree);
    if (kind == KnotKind::periodic) {
      knots_.resize(count + 2 * n + 1);
      for (std::size_t j = 0; j < knots_.size(); ++j) {
        knots_[j] = two_pi * (static_cast<double>(j) - static_cast<double>(n)) /
                    static_cast<double>(count);
      }
    } else {
      const std::size_t intervals = count - n;
      knots_.assign(count + n + 1, 0.0);
      for (std::size_t k = 0; k <= intervals; ++k) {
        knots_[n + k] = static_cast<double>(k) / static_cast<double>(intervals);
      }
      for (std::size_t j = count; j < knots_.size(); ++j) knots_[j] = 1.0;
      knots_[n + intervals] = 1.0;
    }
  }

  std::size_t count() const noexcept { return count_; }
  int degree() const noexcept { return degree_; }
  KnotKind kind() const noexcept { return kind_; }
  const std::vector<double>& knots() const noexcept { return knots_; }

  double domain_begin() const noexcept { return 0.0; }
  double domain_end() const noexcept { return kind_ == KnotKind::periodic ? two_pi : 1.0; }

  std::size_t intervals() const noexcept {
    return kind_ == KnotKind::periodic ? count_ : count_ - static_cast<std::size_t>(degree_);
  }

  /// Length of one inter-knot interval of the domain.
  double spacing() const noexcept {
    return (domain_end() - domain_begin()) / static_cast<double>(intervals());
  }

  /// Left end of domain interval k (0 <= k < intervals()).
  double interval_begin(std::size_t k) const noexcept {
    return knots_[static_cast<std::size_t>(degree_) + k];
  }
  double interval_end(std::size_t k) const noexcept {
    return knots_[static_cast<std::size_t>(degree_) + k + 1];
  }

  /// Maps a parameter into the domain: modulo 2*pi for periodic bases,
  /// clamping to [0,1] for clamped ones.
  double wrap(double x) const noexcept {
    if (kind_ == KnotKind::clamped) return std::clamp(x, 0.0, 1.0);
    double r = x - two_pi * std::floor(x / two_pi);
    if (r >= two_pi || r < 0.0) r = 0.0;
    return r;
  }

  /// Knot span index s with knots[s] <= x < knots[s+1], x already wrapped.
  std::size_t span(double x) const noexcept {
    const auto n = static_cast<std::size_t>(degree_);
    const std::size_t last = n + intervals() - 1;
    auto k = static_cast<std::ptrdiff_t>(std::floor((x - domain_begin()) / spacing()));
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(intervals()) - 1);
    std::size_t s = n + static_cast<std::size_t>(k);
    while (s > n && x < knots_[s]) --s;
    while (s < last && x >= knots_[s + 1]) ++s;
    return s;
  }

  /// Control index of extended basis function e.
  std::size_t control_index(std::size_t extended) const noexcept {
    return kind_ == KnotKind::periodic ? extended % count_ : extended;
  }

  friend bool operator==(const KnotVector& a, const KnotVector& b) noexcept {
    return a.count_ == b.count_ && a.degree_ == b.degree_ && a.kind_ == b.kind_;
  }

 private:
  std::size_t count_ = 0;
  int degree_ = 0;
  KnotKind kind_ = KnotKind::periodic;
  std::vector<double> knots_;
};

inline KnotVector make_knots(std::size_t count, int degree, KnotKind kind) {
  return KnotVector(count, degree, kind);
}

/// Nonzero basis functions and their derivatives at one parameter value.
struct BasisValues {
  std::size_t first = 0;  ///< extended index of the first nonzero function
  Eigen::MatrixXd ders;   ///< (order + 1) x (degree + 1); row k = k-th derivative
};

/// Cox-de Boor recursion with derivatives (Piegl & Tiller, A2.3). Rows for
/// derivative orders above the degree are zero.
inline BasisValues basis_derivatives(const KnotVector& kv, double x, int order) {
  const int p = kv.degree();
  const double u = kv.wrap(x);
  const std::size_t s = kv.span(u);
  const auto& U = kv.knots();

  BasisValues out;
  out.first = s - static_cast<std::size_t>(p);
  out.ders = Eigen::MatrixXd::Zero(order + 1, p + 1);

  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[s + 1 - j];
    right[j] = U[s + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  for (int j = 0; j <= p; ++j) out.ders(0, j) = ndu(j, p);

  const int top = std::min(order, p);
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a.setZero();
    a(0, 0) = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      out.ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= top; ++k) {
    out.ders.row(k) *= factor;
    factor *= (p - k);
  }
  return out;
}

/// Dense collocation matrix: entry (m, j) is the order-th derivative of the
/// basis function acting on control j, evaluated at params[m].
inline Eigen::MatrixXd collocation_matrix(const KnotVector& kv, std::span<const double> params,
                                          int order = 0) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(params.size()),
                                            static_cast<Eigen::Index>(kv.count()));
  for (std::size_t m = 0; m < params.size(); ++m) {
    const BasisValues b = basis_derivatives(kv, params[m], order);
    for (int k = 0; k <= kv.degree(); ++k) {
      A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(kv.control_index(b.first + k))) +=
          b.ders(order, k);
    }
  }
  return A;
}

namespace detail {

inline void check_controls(const KnotVector& basis, const Controls& controls) {
  if (static_cast<std::size_t>(controls.rows()) != basis.count()) {
    throw InvalidArgument("control count " + std::to_string(controls.rows()) +
                          " does not match basis size " + std::to_string(basis.count()));
  }
  if (controls.cols() < 1 || controls.cols() > max_dim) {
    throw UnsupportedDimension(static_cast<int>(controls.cols()), "spline controls");
  }
}

inline Point eval_controls(const KnotVector& basis, const Controls& controls, double x,
                           int order) {
  if (order < 0 || order > basis.degree()) {
    throw InvalidArgument("derivative order " + std::to_string(order) +
                          " exceeds spline degree " + std::to_string(basis.degree()));
  }
  const BasisValues b = basis_derivatives(basis, x, order);
  Point out = Point::Zero(controls.cols());
  for (int k = 0; k <= basis.degree(); ++k) {
    out += b.ders(order, k) *
           controls.row(static_cast<Eigen::Index>(basis.control_index(b.first + k))).transpose();
  }
  return out;
}

}  // namespace detail

class TangentVector;

/// Closed spline curve: N periodic B-spline controls in R^d.
class Curve {
 public:
  Curve() = default;
  Curve(KnotVector basis, Controls controls)
      : basis_(std::move(basis)), controls_(std::move(controls)) {
    if (basis_.kind() != KnotKind::periodic) throw InvalidArgument("curves need a periodic basis");
    detail::check_controls(basis_, controls_);
  }

  /// Curve of the given degree on the uniform periodic basis sized by the
  /// number of control rows.
  static Curve from_controls(Controls controls, int degree) {
    KnotVector basis(static_cast<std::size_t>(controls.rows()), degree, KnotKind::periodic);
    return Curve(std::move(basis), std::move(controls));
  }

  const KnotVector& basis() const noexcept { return basis_; }
  const Controls& controls() const noexcept { return controls_; }
  int degree() const noexcept { return basis_.degree(); }
  std::size_t size() const noexcept { return basis_.count(); }
  int dim() const noexcept { return static_cast<int>(controls_.cols()); }

  /// Value (order 0) or theta-derivative of the curve; theta is taken mod 2*pi.
  Point eval(double theta, int order = 0) const {
    return detail::eval_controls(basis_, controls_, theta, order);
  }

 private:
  KnotVector basis_;
  Controls controls_;
};

/// Vector field along a curve, expressed in the curve's spline basis.
class TangentVector {
 public:
  TangentVector() = default;
  TangentVector(KnotVector basis, Controls controls)
      : basis_(std::move(basis)), controls_(std::move(controls)) {
    detail::check_controls(basis_, controls_);
  }

  static TangentVector zero(const Curve& base) {
    return TangentVector(base.basis(), Controls::Zero(static_cast<Eigen::Index>(base.size()),
                                                      base.dim()));
  }

  const KnotVector& basis() const noexcept { return basis_; }
  const Controls& controls() const noexcept { return controls_; }
  std::size_t size() const noexcept { return basis_.count(); }
  int dim() const noexcept { return static_cast<int>(controls_.cols()); }

  Point eval(double theta, int order = 0) const {
    return detail::eval_controls(basis_, controls_, theta, order);
  }

  TangentVector& operator+=(const TangentVector& o) {
    require_same(o);
    controls_ += o.controls_;
    return *this;
  }
  TangentVector& operator-=(const TangentVector& o) {
    require_same(o);
    controls_ -= o.controls_;
    return *this;
  }
  TangentVector& operator*=(double s) {
    controls_ *= s;
    return *this;
  }

  friend TangentVector operator+(TangentVector a, const TangentVector& b) { return a += b; }
  friend TangentVector operator-(TangentVector a, const TangentVector& b) { return a -= b; }
  friend TangentVector operator*(double s, TangentVector v) { return v *= s; }
  friend TangentVector operator*(TangentVector v, double s) { return v *= s; }
  friend TangentVector operator-(TangentVector v) { return v *= -1.0; }

 private:
  void require_same(const TangentVector& o) const {
    if (!(basis_ == o.basis_) || controls_.cols() != o.controls_.cols()) {
      throw InvalidArgument("tangent vectors live in different spline bases");
    }
  }

  KnotVector basis_;
  Controls controls_;
};

inline bool same_basis(const Curve& c, const TangentVector& v) {
  return c.basis() == v.basis() && c.dim() == v.dim();
}
inline bool same_basis(const Curve& a, const Curve& b) {
  return a.basis() == b.basis() && a.dim() == b.dim();
}

/// Control-wise difference a - b as a tangent vector at b.
inline TangentVector operator-(const Curve& a, const Curve& b) {
  if (!same_basis(a, b)) throw InvalidArgument("curves live in different spline bases");
  return TangentVector(a.basis(), a.controls() - b.controls());
}

inline Curve operator+(const Curve& c, const TangentVector& v) {
  if (!same_basis(c, v)) throw InvalidArgument("tangent vector basis differs from the curve's");
  return Curve(c.basis(), c.controls() + v.controls());
}

/// Cyclic control shift: result control j is c's control (j + shift) mod N,
/// i.e. the curve theta -> c(theta + shift * 2*pi/N).
inline Curve shift_controls(const Curve& c, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(c.size());
  Controls out(c.controls().rows(), c.controls().cols());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    out.row(j) = c.controls().row(((j + shift) % n + n) % n);
  }
  return Curve(c.basis(), std::move(out));
}

/// Tensor-product spline path of curves: clamped basis in time, periodic
/// basis in the curve parameter. Controls are stored row-major by time
/// index: row i * N_theta + j holds c_{i,j}.
class Path {
 public:
  Path() = default;
  Path(KnotVector time_basis, KnotVector space_basis, Controls controls)
      : time_(std::move(time_basis)), space_(std::move(space_basis)), controls_(std::move(controls)) {
    if (time_.kind() != KnotKind::clamped) throw InvalidArgument("path time basis must be clamped");
    if (space_.kind() != KnotKind::periodic) {
      throw InvalidArgument("path space basis must be periodic");
    }
    if (static_cast<std::size_t>(controls_.rows()) != time_.count() * space_.count()) {
      throw InvalidArgument("path control grid has the wrong size");
    }
    if (controls_.cols() < 1 || controls_.cols() > max_dim) {
      throw UnsupportedDimension(static_cast<int>(controls_.cols()), "path controls");
    }
  }

  const KnotVector& time_basis() const noexcept { return time_; }
  const KnotVector& space_basis() const noexcept { return space_; }
  const Controls& controls() const noexcept { return controls_; }
  Controls& controls() noexcept { return controls_; }
  std::size_t nt() const noexcept { return time_.count(); }
  std::size_t ntheta() const noexcept { return space_.count(); }
  int dim() const noexcept { return static_cast<int>(controls_.cols()); }

  /// Control row i (the i-th time control curve) as a Curve.
  Curve row(std::size_t i) const {
    const auto n = static_cast<Eigen::Index>(ntheta());
    return Curve(space_, controls_.middleRows(static_cast<Eigen::Index>(i) * n, n));
  }

  void set_row(std::size_t i, const Controls& row) {
    const auto n = static_cast<Eigen::Index>(ntheta());
    controls_.middleRows(static_cast<Eigen::Index>(i) * n, n) = row;
  }

  /// The curve c(t, .) of the path at time t.
  Curve curve_at(double t) const {
    const BasisValues b = basis_derivatives(time_, t, 0);
    const auto n = static_cast<Eigen::Index>(ntheta());
    Controls out = Controls::Zero(n, dim());
    for (int k = 0; k <= time_.degree(); ++k) {
      out += b.ders(0, k) *
             controls_.middleRows(static_cast<Eigen::Index>(b.first + k) * n, n);
    }
    return Curve(space_, std::move(out));
  }

  /// Partial derivative d^(dt) / dt d^(dtheta) / dtheta of the path.
  Point eval(double t, double theta, int dt = 0, int dtheta = 0) const {
    if (dt < 0 || dt > time_.degree() || dtheta < 0 || dtheta > space_.degree()) {
      throw InvalidArgument("derivative order exceeds path degree");
    }
    if (t < 0.0 || t > 1.0) throw InvalidArgument("path time must lie in [0,1]");
    const BasisValues bt = basis_derivatives(time_, t, dt);
    const BasisValues bs = basis_derivatives(space_, theta, dtheta);
    const auto n = ntheta();
    Point out = Point::Zero(dim());
    for (int a = 0; a <= time_.degree(); ++a) {
      const std::size_t i = bt.first + static_cast<std::size_t>(a);
      for (int b = 0; b <= space_.degree(); ++b) {
        const std::size_t j = space_.control_index(bs.first + static_cast<std::size_t>(b));
        out += bt.ders(dt, a) * bs.ders(dtheta, b) *
               controls_.row(static_cast<Eigen::Index>(i * n + j)).transpose();
      }
    }
    return out;
  }

 private:
  KnotVector time_;
  KnotVector space_;
  Controls controls_;
};

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int points) {
  if (points < 1) throw InvalidArgument("quadrature needs at least one point");
  GaussRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  auto legendre = [points](double z, double& deriv) {
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= points; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    deriv = points * (z * p1 - p2) / (z * z - 1.0);
    return p1;
  };
  const int half = (points + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double dz = legendre(z, dp) / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (points % 2 == 1 && i == half - 1) z = 0.0;
    legendre(z, dp);
    rule.nodes[i] = -z;
    rule.nodes[points - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[points - 1 - i] = w;
  }
  return rule;
}

/// Points per interval used when none is requested: the integrands carry
/// non-polynomial speed factors, so exactness is out of reach anyway.
inline int default_quadrature_points(int degree) { return std::max((2 * degree + 2) / 2, 5); }

/// Gauss-Legendre nodes on every domain interval of a knot vector, with the
/// basis functions and their first two derivatives collocated at the nodes.
class QuadratureGrid {
 public:
  QuadratureGrid() = default;

  QuadratureGrid(KnotVector knots, int points_per_interval)
      : knots_(std::move(knots)), points_(points_per_interval) {
    const GaussRule rule = gauss_legendre(points_per_interval);
    for (std::size_t k = 0; k < knots_.intervals(); ++k) {
      const double a = knots_.interval_begin(k);
      const double b = knots_.interval_end(k);
      for (int m = 0; m < points_per_interval; ++m) {
        nodes_.push_back(a + 0.5 * (b - a) * (rule.nodes[m] + 1.0));
        weights_.push_back(0.5 * (b - a) * rule.weights[m]);
      }
    }
    const Eigen::Index nq = static_cast<Eigen::Index>(nodes_.size());
    const Eigen::Index nb = static_cast<Eigen::Index>(knots_.count());
    for (auto& m : basis_) m = Eigen::MatrixXd::Zero(nq, nb);
    const int order = std::min(2, knots_.degree());
    for (Eigen::Index q = 0; q < nq; ++q) {
      const BasisValues b = basis_derivatives(knots_, nodes_[q], order);
      for (int k = 0; k <= knots_.degree(); ++k) {
        const auto j = static_cast<Eigen::Index>(knots_.control_index(b.first + k));
        for (int r = 0; r <= order; ++r) basis_[r](q, j) += b.ders(r, k);
      }
    }
    weight_vec_ = Eigen::Map<const Eigen::VectorXd>(weights_.data(), nq);
  }

  const KnotVector& knots() const noexcept { return knots_; }
  int points_per_interval() const noexcept { return points_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const Eigen::VectorXd& weight_vector() const noexcept { return weight_vec_; }

  /// Nodes x basis matrix of derivative order 0, 1 or 2.
  const Eigen::MatrixXd& basis(int order) const { return basis_.at(static_cast<std::size_t>(order)); }

  double interval_length() const noexcept { return knots_.spacing(); }

  /// Quadrature of samples f(node_q).
  double integrate(const Eigen::VectorXd& values) const { return weight_vec_.dot(values); }

 private:
  KnotVector knots_;
  int points_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  Eigen::VectorXd weight_vec_;
  std::array<Eigen::MatrixXd, 3> basis_;
};

inline QuadratureGrid quadrature_grid(const KnotVector& knots, int points_per_interval) {
  return QuadratureGrid(knots, points_per_interval);
}

inline QuadratureGrid default_grid(const KnotVector& knots) {
  return QuadratureGrid(knots, default_quadrature_points(knots.degree()));
}

/// Least-squares spline controls for samples (params[m], points.row(m)),
/// solved by column-pivoting QR. Rank deficiency throws SingularFit.
inline Controls fit_controls(const KnotVector& basis, std::span<const double> params,
                             const Controls& points) {
  if (static_cast<std::size_t>(points.rows()) != params.size()) {
    throw InvalidArgument("sample parameter and point counts differ");
  }
  if (params.size() < basis.count()) {
    throw SingularFit(params.size(), basis.count(), "fewer samples than controls");
  }
  const Eigen::MatrixXd A = collocation_matrix(basis, params, 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (static_cast<std::size_t>(qr.rank()) < basis.count()) {
    throw SingularFit(static_cast<std::size_t>(qr.rank()), basis.count(), "design matrix");
  }
  const Eigen::MatrixXd rhs = points;
  Controls out = qr.solve(rhs);
  return out;
}

/// Least-squares closed curve with `count` controls of the given degree.
inline Curve fit_least_squares(std::span<const double> params, const Controls& points,
                               std::size_t count, int degree) {
  KnotVector basis(count, degree, KnotKind::periodic);
  Controls controls = fit_controls(basis, params, points);
  return Curve(std::move(basis), std::move(controls));
}

/// Samples a curve at `count` uniform parameters 2*pi*m/count.
inline Controls sample_curve(const Curve& c, std::size_t count, int order = 0) {
  Controls out(static_cast<Eigen::Index>(count), c.dim());
  for (std::size_t m = 0; m < count; ++m) {
    out.row(static_cast<Eigen::Index>(m)) =
        c.eval(two_pi * static_cast<double>(m) / static_cast<double>(count), order).transpose();
  }
  return out;
}

/// Least-squares projection of a parametric closed curve f: [0,2pi) -> R^d
/// onto a periodic spline basis, from `samples` uniform samples.
template <typename F>
Curve project_curve(F&& f, std::size_t count, int degree, int dim = 2, std::size_t samples = 0) {
  if (samples == 0) samples = 16 * count;
  std::vector<double> params(samples);
  Controls pts(static_cast<Eigen::Index>(samples), dim);
  for (std::size_t m = 0; m < samples; ++m) {
    params[m] = two_pi * static_cast<double>(m) / static_cast<double>(samples);
    const auto p = f(params[m]);
    for (int k = 0; k < dim; ++k) pts(static_cast<Eigen::Index>(m), k) = p[k];
  }
  return fit_least_squares(params, pts, count, degree);
}

}  // namespace curvematch
