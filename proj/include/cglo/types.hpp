#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cglo {

using Vector = Eigen::VectorXd;
/// Point sets are stored one point per row.
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Axis-aligned box domain.
struct Box {
  Vector lower;
  Vector upper;

  static Box unit(std::size_t dim) {
    return Box{Vector::Zero(static_cast<Eigen::Index>(dim)),
               Vector::Ones(static_cast<Eigen::Index>(dim))};
  }

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  Vector width() const { return upper - lower; }
  double diagonal() const { return (upper - lower).norm(); }

  bool contains(const VectorRef& x, double tol = 1e-12) const {
    if (x.size() != lower.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    }
    return true;
  }

  /// Maps a point of this box onto the unit cube.
  Vector to_unit(const VectorRef& x) const {
    return ((x - lower).array() / width().array()).matrix();
  }
  Vector from_unit(const VectorRef& u) const {
    return (lower.array() + u.array() * width().array()).matrix();
  }
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// A covariance matrix could not be factorized even after the full jitter ladder.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double max_jitter, Eigen::Index size)
      : std::runtime_error(what), max_jitter_(max_jitter), size_(size) {}
  double max_jitter() const { return max_jitter_; }
  Eigen::Index size() const { return size_; }

 private:
  double max_jitter_;
  Eigen::Index size_;
};

class FittingFailedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Eigen::Index to_index(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace cglo
