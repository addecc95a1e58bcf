#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace adapt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box, used for both state and action spaces.
struct BoxSpace {
  Vector lower;
  Vector upper;

  BoxSpace() = default;
  BoxSpace(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
      throw std::invalid_argument("BoxSpace: lower/upper dimension mismatch");
    }
    if ((lower.array() > upper.array()).any()) {
      throw std::invalid_argument("BoxSpace: lower exceeds upper");
    }
  }

  Eigen::Index dim() const { return lower.size(); }

  bool contains(const Vector& v) const {
    return v.size() == lower.size() && (v.array() >= lower.array()).all() &&
           (v.array() <= upper.array()).all();
  }

  Vector clamp(const Vector& v) const {
    if (v.size() != lower.size()) {
      throw std::invalid_argument("BoxSpace::clamp: dimension mismatch");
    }
    return v.cwiseMax(lower).cwiseMin(upper);
  }

  /// Shrink each dimension symmetrically by a fraction of its half-width.
  BoxSpace shrunk(double margin) const {
    Vector half = 0.5 * (upper - lower);
    Vector mid = 0.5 * (upper + lower);
    return BoxSpace(mid - (1.0 - 2.0 * margin) * half,
                    mid + (1.0 - 2.0 * margin) * half);
  }
};

/// Time-indexed state/action sequence: states.size() == actions.size() + 1.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> actions;
  double dt = 0.0;

  int horizon() const { return static_cast<int>(actions.size()); }
};

/// One step of discrete-time affine dynamics s' = A s + B a + c.
struct LinearizedStep {
  Matrix A;
  Matrix B;
  Vector c;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace adapt
