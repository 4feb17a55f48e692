#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace autonorm {

/// Largest supported half-dimension n of the phase space R^{2n}.
inline constexpr int kMaxHalfDim = 8;
inline constexpr int kMaxPhaseDim = 2 * kMaxHalfDim;

/// Dynamic-size column vector with inline storage; never touches the heap.
template <typename Scalar>
using PhaseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxPhaseDim, 1>;

template <typename Scalar>
using PhaseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                                  kMaxPhaseDim, kMaxPhaseDim>;

/// Coordinates ordered (x_1, y_1, ..., x_n, y_n).
using PhasePoint = PhaseVector<double>;
using Tangent = PhaseVector<double>;
using Jacobian = PhaseMatrix<double>;

/// Per-coordinate closed box; Eigen's null box (min > max) is the empty set.
using Box = Eigen::AlignedBox<double, Eigen::Dynamic>;

inline constexpr int x_index(int i) { return 2 * (i - 1); }
inline constexpr int y_index(int i) { return 2 * (i - 1) + 1; }

/// Name of coordinate `k` in the (x_1, y_1, ...) ordering, e.g. "y2".
inline std::string coordinate_name(int k) {
  return (k % 2 == 0 ? "x" : "y") + std::to_string(k / 2 + 1);
}

/// Raised when a construction precondition fails (unbounded support, overlap, m = 0, ...).
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Box empty_box(int dim) {
  Box b(dim);
  b.setEmpty();
  return b;
}

inline Box full_box(int dim) {
  Box b(dim);
  b.min().setConstant(-std::numeric_limits<double>::infinity());
  b.max().setConstant(std::numeric_limits<double>::infinity());
  return b;
}

inline bool is_bounded(const Box& b) {
  return b.isEmpty() || (b.min().allFinite() && b.max().allFinite());
}

/// Strict containment test that treats the empty box correctly.
template <typename Derived>
bool box_contains(const Box& b, const Eigen::MatrixBase<Derived>& z) {
  if (b.isEmpty()) return false;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (z[k] < b.min()[k] || z[k] > b.max()[k]) return false;
  }
  return true;
}

inline bool boxes_disjoint(const Box& a, const Box& b) {
  return a.isEmpty() || b.isEmpty() || a.intersection(b).isEmpty();
}

}  // namespace autonorm
