#include "caldera/linalg.hpp"

#include <cmath>

#include "caldera/errors.hpp"

namespace caldera {

namespace {

// Flip so the largest-magnitude entry is positive; returns whether it flipped.
bool normalize_sign(Eigen::VectorXd& v) {
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) >= 0.0) return false;
  v *= -1.0;
  return true;
}

}  // namespace

Svd svd(const Matrix& A, bool full) {
  if (!A.allFinite()) throw DomainError("svd: non-finite input");
  Svd out;
  if (A.size() == 0) {
    out.U = Matrix::Identity(A.rows(), full ? A.rows() : 0);
    out.V = Matrix::Identity(A.cols(), full ? A.cols() : 0);
    return out;
  }
  unsigned opts = full ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                       : (Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd Acm = A;
  Eigen::BDCSVD<Eigen::MatrixXd> solver(Acm, opts);
  Eigen::MatrixXd U = solver.matrixU();
  Eigen::MatrixXd V = solver.matrixV();
  out.s = solver.singularValues();
  const Index pairs = out.s.size();
  for (Index c = 0; c < U.cols(); ++c) {
    Eigen::VectorXd u = U.col(c);
    if (normalize_sign(u)) {
      U.col(c) = u;
      if (c < pairs) V.col(c) *= -1.0;
    }
  }
  // Completion columns of V have no partner in U.
  for (Index c = pairs; c < V.cols(); ++c) {
    Eigen::VectorXd v = V.col(c);
    if (normalize_sign(v)) V.col(c) = v;
  }
  out.U = U;
  out.V = V;
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& S) {
  if (S.rows() != S.cols()) throw ShapeError("symmetric_eigen: matrix must be square");
  if (!S.allFinite()) throw DomainError("symmetric_eigen: non-finite input");
  Eigen::MatrixXd Scm = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Scm);
  if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Index numerical_rank(const Vector& s, double rel_cutoff) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = rel_cutoff * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

Matrix pseudo_inverse(const Matrix& A, double rel_cutoff) {
  Svd f = svd(A);
  Index r = numerical_rank(f.s, rel_cutoff);
  Matrix out = Matrix::Zero(A.cols(), A.rows());
  if (r == 0) return out;
  out = f.V.leftCols(r) * f.s.head(r).cwiseInverse().asDiagonal() * f.U.leftCols(r).transpose();
  return out;
}

double proxy_error(const Matrix& E, const Matrix& H, double m) {
  if (E.cols() != H.rows() || H.rows() != H.cols()) throw ShapeError("proxy_error: shape mismatch");
  if (E.size() == 0) return 0.0;
  Matrix EH = E * H;
  double tr = EH.cwiseProduct(E).sum();
  return m * std::max(tr, 0.0);
}

double relative_asymmetry(const Matrix& S) {
  double nrm = S.norm();
  if (nrm == 0.0) return 0.0;
  return (S - S.transpose()).norm() / nrm;
}

}  // namespace caldera
