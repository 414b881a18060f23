#pragma once

#include "caldera/types.hpp"

namespace caldera {

enum class RcrBranch { wide, tall, positive_definite };

const char* to_string(RcrBranch branch) noexcept;

/// Solution of min_{rank(Z) <= k} ||X Z - Y||_F^2.
///
/// For solve_rcr, Z_star is d x n. For solve_rcr_pd the problem is posed in
/// A's orientation and Z_star is n x d (the transpose of the equivalent
/// solve_rcr(H^{1/2}, H^{1/2} A^T, k) solution).
struct RcrSolution {
  Matrix Z_star;
  Matrix left_factor;
  Matrix right_factor;
  double optimal_value = 0.0;
  double irreducible = 0.0;
  RcrBranch branch = RcrBranch::wide;
  Index rank_x = 0;
};

// Dispatches on the shape of X: wide when m <= d, tall when m > d.
RcrSolution solve_rcr(const Matrix& X, const Matrix& Y, Index k);
// Forced branches; m == d is accepted by both.
RcrSolution solve_rcr_wide(const Matrix& X, const Matrix& Y, Index k);
RcrSolution solve_rcr_tall(const Matrix& X, const Matrix& Y, Index k);

// min_{rank(Z) <= k} ||(A - Z) H^{1/2}||_F^2 for symmetric positive definite H.
RcrSolution solve_rcr_pd(const Matrix& A, const Matrix& H, Index k);

// ||X Z - Y||_F^2
double rcr_objective(const Matrix& X, const Matrix& Z, const Matrix& Y);

}  // namespace caldera
