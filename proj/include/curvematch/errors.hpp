#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace curvematch {

enum class ErrorKind {
  invalid_argument,
  degenerate_curve,
  degenerate_path,
  singular_fit,
  unsupported_dimension,
  step_failure,
  convergence_failure,
  partial_result,
  degenerate_histogram,
  empty_foreground,
  degenerate_dataset,
  io_error,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::degenerate_curve: return "degenerate_curve";
    case ErrorKind::degenerate_path: return "degenerate_path";
    case ErrorKind::singular_fit: return "singular_fit";
    case ErrorKind::unsupported_dimension: return "unsupported_dimension";
    case ErrorKind::step_failure: return "step_failure";
    case ErrorKind::convergence_failure: return "convergence_failure";
    case ErrorKind::partial_result: return "partial_result";
    case ErrorKind::degenerate_histogram: return "degenerate_histogram";
    case ErrorKind::empty_foreground: return "empty_foreground";
    case ErrorKind::degenerate_dataset: return "degenerate_dataset";
    case ErrorKind::io_error: return "io_error";
  }
  return "unknown";
}

/// Base class of every exception thrown by the library. The kind is stable
/// and is what the CLI reports in its machine-readable error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorKind::invalid_argument, message) {}
};

/// |c_theta| fell below the regularity threshold at a quadrature node.
class DegenerateCurve : public Error {
 public:
  DegenerateCurve(std::size_t node, double theta)
      : Error(ErrorKind::degenerate_curve,
              "curve speed vanishes at quadrature node " + std::to_string(node) +
                  " (theta=" + std::to_string(theta) + ")"),
        node_(node),
        theta_(theta) {}

  std::size_t node() const noexcept { return node_; }
  double theta() const noexcept { return theta_; }

 private:
  std::size_t node_;
  double theta_;
};

class DegeneratePath : public Error {
 public:
  DegeneratePath(double t, double theta)
      : Error(ErrorKind::degenerate_path,
              "path is not regular at (t=" + std::to_string(t) +
                  ", theta=" + std::to_string(theta) + ")"),
        t_(t),
        theta_(theta) {}

  double t() const noexcept { return t_; }
  double theta() const noexcept { return theta_; }

 private:
  double t_;
  double theta_;
};

class SingularFit : public Error {
 public:
  SingularFit(std::size_t rank, std::size_t expected, const std::string& what = {})
      : Error(ErrorKind::singular_fit,
              "rank-deficient spline fit: rank " + std::to_string(rank) + " of " +
                  std::to_string(expected) + (what.empty() ? "" : " (" + what + ")")),
        rank_(rank),
        expected_(expected) {}

  std::size_t rank() const noexcept { return rank_; }
  std::size_t expected() const noexcept { return expected_; }

 private:
  std::size_t rank_;
  std::size_t expected_;
};

class UnsupportedDimension : public Error {
 public:
  UnsupportedDimension(int dim, const std::string& what)
      : Error(ErrorKind::unsupported_dimension,
              what + " is not supported in dimension " + std::to_string(dim)) {}
};

/// Newton iteration of a discrete exponential step did not converge.
class StepFailure : public Error {
 public:
  StepFailure(std::size_t index, const std::string& message)
      : Error(ErrorKind::step_failure,
              "discrete exponential step " + std::to_string(index) + " failed: " + message +
                  "; try a smaller step"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Some independent solves of a batch failed; the indices are listed.
class PartialResult : public Error {
 public:
  PartialResult(std::vector<std::size_t> failed, const std::string& message)
      : Error(ErrorKind::partial_result, message), failed_(std::move(failed)) {}

  const std::vector<std::size_t>& failed() const noexcept { return failed_; }

 private:
  std::vector<std::size_t> failed_;
};

/// An iterative solve whose result is required downstream did not converge.
class ConvergenceFailure : public Error {
 public:
  explicit ConvergenceFailure(const std::string& message)
      : Error(ErrorKind::convergence_failure, message) {}
};

/// Image whose histogram has a single occupied bin.
class DegenerateHistogram : public Error {
 public:
  explicit DegenerateHistogram(const std::string& message)
      : Error(ErrorKind::degenerate_histogram, message) {}
};

class EmptyForeground : public Error {
 public:
  explicit EmptyForeground(const std::string& message)
      : Error(ErrorKind::empty_foreground, message) {}
};

/// Dataset that cannot support the requested statistic (too few curves,
/// zero variance, ...).
class DegenerateDataset : public Error {
 public:
  explicit DegenerateDataset(const std::string& message)
      : Error(ErrorKind::degenerate_dataset, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::io_error, message) {}
};

}  // namespace curvematch
