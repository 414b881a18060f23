#include "caldera/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caldera/errors.hpp"

namespace caldera {

namespace {
constexpr double kSymmetryTolerance = 1e-10;
constexpr double kRankCutoff = 1e-12;
// Pivot slack used when factoring a context's m*H, relative to its largest diagonal.
constexpr double kContextPivotSlack = 1e-10;
}  // namespace

LdlFactors ldl_upper(const Matrix& A, double pivot_tolerance) {
  if (A.rows() != A.cols()) throw ShapeError("ldl_upper: matrix must be square");
  if (!A.allFinite()) throw DomainError("ldl_upper: non-finite input");
  if (relative_asymmetry(A) > kSymmetryTolerance) throw DomainError("ldl_upper: matrix is not symmetric");
  const Index d = A.rows();

  Matrix S = 0.5 * (A + A.transpose());
  LdlFactors out{Matrix::Zero(d, d), Vector::Zero(d)};
  for (Index j = d - 1; j >= 0; --j) {
    double p = S(j, j);
    if (p <= pivot_tolerance) {
      if (pivot_tolerance > 0.0 && p >= -pivot_tolerance) continue;
      throw FactorizationError("ldl_upper: non-positive pivot " + std::to_string(p) + " at index " +
                                   std::to_string(j),
                               j);
    }
    out.D(j) = p;
    if (j == 0) break;
    auto col = S.col(j).head(j);
    out.M.col(j).head(j) = col / p;
    // Schur complement on the leading block.
    S.topLeftCorner(j, j).noalias() -= (col * col.transpose()) / p;
  }
  return out;
}

double default_regularization(const Matrix& H) {
  if (H.rows() == 0) return 0.0;
  return 1e-6 * H.trace() / static_cast<double>(H.rows());
}

HessianContext hessian_context(const Matrix& H, Index m, double delta) {
  if (H.rows() != H.cols() || H.rows() == 0) throw ShapeError("hessian: H must be square and nonempty");
  if (m < 1) throw DomainError("hessian: m must be at least 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("hessian: delta must be nonnegative");
  if (!H.allFinite()) throw DomainError("hessian: non-finite H");
  if (relative_asymmetry(H) > kSymmetryTolerance) throw DomainError("hessian: H is not symmetric");

  const Index d = H.rows();
  HessianContext ctx;
  ctx.m = m;
  ctx.regularization = delta;
  ctx.H = 0.5 * (H + H.transpose());
  ctx.H.diagonal().array() += delta;

  ctx.eigen = symmetric_eigen(ctx.H);
  const Vector& ev = ctx.eigen.values;
  ctx.lambda_max = std::max(ev(d - 1), 0.0);
  ctx.lambda_min = std::max(ev(0), 0.0);
  if (ev(0) < -1e-10 * std::max(ctx.lambda_max, 1e-300)) {
    throw FactorizationError("hessian: H is indefinite (smallest eigenvalue " + std::to_string(ev(0)) +
                                 "); increase delta",
                             -1);
  }

  const double cut = kRankCutoff * ctx.lambda_max;
  Index rank = 0;
  for (Index i = 0; i < d; ++i) rank += ev(i) > cut ? 1 : 0;
  if (rank == d) {
    ctx.HHdagger = Matrix::Identity(d, d);
    ctx.hhdagger_identity = true;
  } else {
    Matrix Vr = ctx.eigen.vectors.rightCols(rank);
    ctx.HHdagger = Vr * Vr.transpose();
  }

  Matrix mH = static_cast<double>(m) * ctx.H;
  double slack = kContextPivotSlack * std::max(mH.diagonal().maxCoeff(), 0.0);
  LdlFactors f = ldl_upper(mH, rank == d ? 0.0 : slack);
  ctx.M = std::move(f.M);
  ctx.D = std::move(f.D);
  return ctx;
}

HessianContext compute_hessian(const Matrix& X, double delta) {
  if (X.rows() < 1 || X.cols() < 1) throw ShapeError("compute_hessian: X must be nonempty");
  if (!X.allFinite()) throw DomainError("compute_hessian: non-finite X");
  Matrix H = (X.transpose() * X) / static_cast<double>(X.rows());
  return hessian_context(H, X.rows(), delta);
}

double proxy_error(const Matrix& E, const HessianContext& ctx) {
  return proxy_error(E, ctx.H, static_cast<double>(ctx.m));
}

}  // namespace caldera
