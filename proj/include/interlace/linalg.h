#pragma once

#include <Eigen/Dense>

namespace interlace::linalg {

// Determinants here are at most (2n+1) x (2n+1) with small n; the fixed upper
// bound keeps the storage on the stack.
inline constexpr int kMaxDim = 32;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

// Dense LU with partial pivoting.
double determinant(const Matrix& m);

// Product of row 2-norms; bounds |det m| (Hadamard) and sets the scale for
// deciding whether a negative determinant is roundoff.
double hadamard_bound(const Matrix& m);

} // namespace interlace::linalg
