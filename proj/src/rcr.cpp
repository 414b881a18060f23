#include "caldera/rcr.hpp"

#include <algorithm>
#include <string>

#include "caldera/errors.hpp"
#include "caldera/linalg.hpp"

namespace caldera {

namespace {

void validate(const Matrix& X, const Matrix& Y, Index k) {
  if (X.rows() != Y.rows()) throw ShapeError("rcr: X and Y must have the same number of rows");
  if (X.size() == 0 || Y.size() == 0) throw ShapeError("rcr: empty input");
  if (!X.allFinite() || !Y.allFinite()) throw DomainError("rcr: non-finite input");
  if (k < 1 || k > std::min(X.rows(), Y.cols())) {
    throw DomainError("rcr: k must be in [1, min(m, n)], got " + std::to_string(k));
  }
}

// Shared closed form once X = U S V^T is known. Only the r = rank(X) leading
// directions of U can be reached by X Z; the remaining part of Y is the
// irreducible term. For m > d with full-rank X these are exactly the (U I_d)
// and (U I-bar) blocks; for m <= d with full-rank X the irreducible part is empty.
RcrSolution solve_from_svd(const Svd& fx, const Matrix& Y, Index k, Index d, RcrBranch branch) {
  const Index n = Y.cols();
  const Index r = numerical_rank(fx.s);
  RcrSolution out;
  out.branch = branch;
  out.rank_x = r;
  out.left_factor = Matrix::Zero(d, k);
  out.right_factor = Matrix::Zero(k, n);
  out.Z_star = Matrix::Zero(d, n);
  if (r == 0) {
    out.irreducible = Y.squaredNorm();
    out.optimal_value = out.irreducible;
    return out;
  }

  Matrix Yr = fx.U.leftCols(r).transpose() * Y;
  if (fx.U.cols() > r) {
    out.irreducible = (fx.U.rightCols(fx.U.cols() - r).transpose() * Y).squaredNorm();
  }

  Svd fy = svd(Yr);
  const Index keff = std::min<Index>(k, fy.s.size());
  Matrix left = fx.V.leftCols(r) * fx.s.head(r).cwiseInverse().asDiagonal() * fy.U.leftCols(keff);
  Matrix right = fy.s.head(keff).asDiagonal() * fy.V.leftCols(keff).transpose();
  out.left_factor.leftCols(keff) = left;
  out.right_factor.topRows(keff) = right;
  out.Z_star = left * right;

  double tail = 0.0;
  for (Index i = keff; i < fy.s.size(); ++i) tail += fy.s(i) * fy.s(i);
  out.optimal_value = tail + out.irreducible;
  return out;
}

}  // namespace

const char* to_string(RcrBranch branch) noexcept {
  switch (branch) {
    case RcrBranch::wide: return "wide";
    case RcrBranch::tall: return "tall";
    case RcrBranch::positive_definite: return "positive_definite";
  }
  return "unknown";
}

RcrSolution solve_rcr_wide(const Matrix& X, const Matrix& Y, Index k) {
  validate(X, Y, k);
  if (X.rows() > X.cols()) throw ShapeError("rcr: wide branch needs m <= d");
  // U is m x m; V is completed to d x d but only its first rank(X) columns are used.
  return solve_from_svd(svd(X, true), Y, k, X.cols(), RcrBranch::wide);
}

RcrSolution solve_rcr_tall(const Matrix& X, const Matrix& Y, Index k) {
  validate(X, Y, k);
  if (X.rows() < X.cols()) throw ShapeError("rcr: tall branch needs m >= d");
  // Full U supplies both the (U I_d) block and its complement (U I-bar).
  return solve_from_svd(svd(X, true), Y, k, X.cols(), RcrBranch::tall);
}

RcrSolution solve_rcr(const Matrix& X, const Matrix& Y, Index k) {
  return X.rows() <= X.cols() ? solve_rcr_wide(X, Y, k) : solve_rcr_tall(X, Y, k);
}

RcrSolution solve_rcr_pd(const Matrix& A, const Matrix& H, Index k) {
  if (H.rows() != H.cols() || H.cols() != A.cols()) throw ShapeError("rcr_pd: H must be d x d");
  if (!A.allFinite()) throw DomainError("rcr_pd: non-finite A");
  if (k < 1 || k > std::min(A.rows(), A.cols())) throw DomainError("rcr_pd: k out of range");
  if (relative_asymmetry(H) > 1e-10) throw DomainError("rcr_pd: H is not symmetric");
  SymmetricEigen eh = symmetric_eigen(H);
  if (eh.values(0) <= 0.0) throw DomainError("rcr_pd: H is not positive definite");

  Vector sq = eh.values.cwiseSqrt();
  Matrix Yt = A * eh.vectors * sq.asDiagonal();
  Svd fy = svd(Yt);
  RcrSolution out;
  out.branch = RcrBranch::positive_definite;
  out.rank_x = H.rows();
  out.left_factor = fy.U.leftCols(k);
  out.right_factor = fy.s.head(k).asDiagonal() * fy.V.leftCols(k).transpose() *
                     sq.cwiseInverse().asDiagonal() * eh.vectors.transpose();
  out.Z_star = out.left_factor * out.right_factor;
  double tail = 0.0;
  for (Index i = k; i < fy.s.size(); ++i) tail += fy.s(i) * fy.s(i);
  out.optimal_value = tail;
  return out;
}

double rcr_objective(const Matrix& X, const Matrix& Z, const Matrix& Y) { return (X * Z - Y).squaredNorm(); }

}  // namespace caldera
