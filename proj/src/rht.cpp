#include "caldera/rht.hpp"

#include <cmath>

#include "caldera/errors.hpp"
#include "caldera/random.hpp"

namespace caldera {

namespace {

std::vector<double> random_signs(const RandomStream& rng, Index n) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s[i] = (rng.bits(0, static_cast<std::uint64_t>(i)) >> 63) ? -1.0 : 1.0;
  return s;
}

// Hadamard on every row of a row-major matrix (i.e. A * Had).
void hadamard_rows(Matrix& A) {
  for (Index i = 0; i < A.rows(); ++i) fwht({A.row(i).data(), static_cast<std::size_t>(A.cols())});
}

// Had * A
void hadamard_cols(Matrix& A) {
  Matrix T = A.transpose();
  hadamard_rows(T);
  A = T.transpose();
}

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Index>(v.size())};
}

}  // namespace

Index next_power_of_two(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

RhtContext make_rht(std::uint64_t seed, Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw ShapeError("make_rht: dimensions must be positive");
  RhtContext ctx;
  ctx.seed = seed;
  ctx.rows = rows;
  ctx.cols = cols;
  ctx.padded_rows = next_power_of_two(rows);
  ctx.padded_cols = next_power_of_two(cols);
  RandomStream base(seed, 0x5248);
  ctx.left_signs = random_signs(base.substream(0), ctx.padded_rows);
  ctx.right_signs = random_signs(base.substream(1), ctx.padded_cols);
  return ctx;
}

void fwht(std::span<double> v) {
  const std::size_t n = v.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ShapeError("fwht: length must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        double a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

Matrix rht_forward(const Matrix& W, const RhtContext& ctx) {
  if (W.rows() != ctx.rows || W.cols() != ctx.cols) throw ShapeError("rht_forward: shape mismatch");
  Matrix P = Matrix::Zero(ctx.padded_rows, ctx.padded_cols);
  P.topLeftCorner(ctx.rows, ctx.cols) = W;
  // H_L^T P = diag(sL) Had P / sqrt(n)
  hadamard_cols(P);
  P = as_vector(ctx.left_signs).asDiagonal() * P;
  // (.) H_R = (.) Had diag(sR) / sqrt(d)
  hadamard_rows(P);
  P = P * as_vector(ctx.right_signs).asDiagonal();
  P /= std::sqrt(static_cast<double>(ctx.padded_rows) * static_cast<double>(ctx.padded_cols));
  return P;
}

Matrix rht_forward_hessian(const Matrix& H, const RhtContext& ctx, double padding_diagonal) {
  if (H.rows() != ctx.cols || H.cols() != ctx.cols) throw ShapeError("rht_forward_hessian: shape mismatch");
  Matrix P = Matrix::Zero(ctx.padded_cols, ctx.padded_cols);
  P.topLeftCorner(ctx.cols, ctx.cols) = H;
  for (Index i = ctx.cols; i < ctx.padded_cols; ++i) P(i, i) = padding_diagonal;
  auto s = as_vector(ctx.right_signs);
  hadamard_cols(P);
  P = s.asDiagonal() * P;
  hadamard_rows(P);
  P = P * s.asDiagonal();
  P /= static_cast<double>(ctx.padded_cols);
  return 0.5 * (P + P.transpose());
}

Matrix rht_inverse(const Matrix& Wt, const RhtContext& ctx) {
  if (Wt.rows() != ctx.padded_rows || Wt.cols() != ctx.padded_cols) {
    throw ShapeError("rht_inverse: expected padded shape");
  }
  // H_L Wt = Had diag(sL) Wt / sqrt(n); (.) H_R^T = (.) diag(sR) Had / sqrt(d)
  Matrix P = as_vector(ctx.left_signs).asDiagonal() * Wt;
  hadamard_cols(P);
  P = P * as_vector(ctx.right_signs).asDiagonal();
  hadamard_rows(P);
  P /= std::sqrt(static_cast<double>(ctx.padded_rows) * static_cast<double>(ctx.padded_cols));
  return P.topLeftCorner(ctx.rows, ctx.cols);
}

}  // namespace caldera
