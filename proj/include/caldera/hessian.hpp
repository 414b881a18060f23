#pragma once

#include "caldera/linalg.hpp"
#include "caldera/types.hpp"

namespace caldera {

struct LdlFactors {
  Matrix M;  // strictly upper triangular
  Vector D;
};

/// A = (M + I) diag(D) (M + I)^T with M strictly upper triangular.
///
/// Backward elimination from the last index. With pivot_tolerance = 0 every
/// pivot must be strictly positive. A positive tolerance admits PSD input:
/// pivots in [-tol, tol] become D_j = 0 and column j of M is left at zero.
/// Throws FactorizationError carrying the failing pivot index.
LdlFactors ldl_upper(const Matrix& A, double pivot_tolerance = 0.0);

struct HessianContext {
  Matrix H;
  Matrix M;  // LDL feedback from m*H
  Vector D;  // LDL diagonal from m*H
  Matrix HHdagger;
  bool hhdagger_identity = false;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  Index m = 0;
  double regularization = 0.0;
  SymmetricEigen eigen;  // of H, ascending

  Index dim() const noexcept { return H.rows(); }
};

// H = X^T X / m + delta I.
HessianContext compute_hessian(const Matrix& X, double delta);

// Context around a precomputed (PSD) H; delta is added to its diagonal.
HessianContext hessian_context(const Matrix& H, Index m, double delta = 0.0);

// 1e-6 * trace(H) / d
double default_regularization(const Matrix& H);

double proxy_error(const Matrix& E, const HessianContext& ctx);

}  // namespace caldera
