#include "caldera/lplr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caldera/errors.hpp"
#include "caldera/linalg.hpp"

namespace caldera {

namespace {

constexpr double kRankCutoff = 1e-12;
constexpr double kGramRegularization = 1e-10;

double fraction(std::size_t count, std::size_t total) {
  return total ? static_cast<double>(count) / static_cast<double>(total) : 0.0;
}

// sqrt(m lambda_i) with eigenvalues below the rank cutoff treated as zero.
Vector calibration_scales(const HessianContext& ctx) {
  const Vector& ev = ctx.eigen.values;
  const double cut = kRankCutoff * ctx.lambda_max;
  Vector s(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    s(i) = ev(i) > cut ? std::sqrt(static_cast<double>(ctx.m) * ev(i)) : 0.0;
  }
  return s;
}

// X_eq A^T = diag(scales) U^T A^T
Matrix calibrated_product(const Matrix& A, const HessianContext& ctx, const Vector& scales) {
  return scales.asDiagonal() * (ctx.eigen.vectors.transpose() * A.transpose());
}

void check_shapes(const Matrix& A, Index k, const HessianContext& ctx) {
  if (A.cols() != ctx.dim()) throw ShapeError("lplr: A has " + std::to_string(A.cols()) + " columns but H is " +
                                              std::to_string(ctx.dim()) + " x " + std::to_string(ctx.dim()));
  if (!A.allFinite()) throw DomainError("lplr: non-finite A");
  if (k < 1 || k > std::min(A.rows(), A.cols())) {
    throw DomainError("lplr: k must be in [1, min(n, d)], got " + std::to_string(k));
  }
}

struct FactorDraw {
  Matrix values;
  std::size_t saturated = 0;
};

FactorDraw quantize_factor(const Matrix& F, const QuantizerSpec& spec, bool adaptive, const RandomStream& rng) {
  if (adaptive) {
    double r = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
    auto q = quantize_matrix(QuantizerSpec(spec.bits(), r > 0.0 ? r : 1.0), F, rng);
    return {std::move(q.values), q.saturation_count};
  }
  auto q = quantize_matrix(spec, F, rng);
  return {std::move(q.values), q.saturation_count};
}

}  // namespace

double FactorSaturation::left_fraction() const noexcept { return fraction(left, left_entries); }
double FactorSaturation::right_fraction() const noexcept { return fraction(right, right_entries); }

Vector calibrated_singular_values(const Matrix& A, const HessianContext& ctx) {
  if (A.cols() != ctx.dim()) throw ShapeError("calibrated_singular_values: shape mismatch");
  if (A.size() == 0) return Vector();
  return svd(calibrated_product(A, ctx, calibration_scales(ctx))).s;
}

LplrInit lplr_initial_right(const Matrix& A, Index k, const HessianContext& ctx) {
  check_shapes(A, k, ctx);
  const Vector scales = calibration_scales(ctx);
  Svd fy = svd(calibrated_product(A, ctx, scales));
  const Index keff = std::min<Index>(k, fy.s.size());

  Vector inv = scales;
  for (Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > 0.0 ? 1.0 / inv(i) : 0.0;
  Matrix B = ctx.eigen.vectors * inv.asDiagonal() * fy.U.leftCols(keff);
  Svd fb = svd(B);
  Matrix basis = fb.U * fb.V.transpose();  // d x keff, orthonormal columns

  LplrInit out;
  out.singular_values = fy.s;
  out.right = Matrix::Zero(k, A.cols());
  out.right.topRows(keff) = fy.s.head(keff).asDiagonal() * basis.transpose();
  return out;
}

Matrix update_left(const Matrix& A, const HessianContext& ctx, const Matrix& R, std::size_t* regularized) {
  if (R.cols() != ctx.dim() || A.cols() != ctx.dim()) throw ShapeError("update_left: shape mismatch");
  Matrix HR = ctx.H * R.transpose();  // d x k
  Eigen::MatrixXd G = R * HR;
  G = 0.5 * (G + G.transpose());
  Eigen::MatrixXd rhs = (A * HR).transpose();  // k x n

  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14) {
    double shift = kGramRegularization * std::max(G.trace(), 0.0);
    if (!(shift > 0.0)) shift = kGramRegularization;
    G.diagonal().array() += shift;
    llt.compute(G);
    if (regularized) ++*regularized;
  }
  if (llt.info() != Eigen::Success) return (A * HR) * pseudo_inverse(Matrix(G));
  return llt.solve(rhs).transpose();
}

Matrix update_right(const Matrix& A, const HessianContext& ctx, const Matrix& L) {
  if (L.rows() != A.rows() || A.cols() != ctx.dim()) throw ShapeError("update_right: shape mismatch");
  Matrix Z = pseudo_inverse(L) * A;
  if (!ctx.hhdagger_identity) Z = Z * ctx.HHdagger;
  return Z;
}

analysis::FactorRanges default_factor_ranges(const Matrix& A, Index k, const HessianContext& ctx) {
  check_shapes(A, k, ctx);
  Vector s = calibrated_singular_values(A, ctx);
  analysis::FactorRanges out;
  const double s1 = s.size() ? s(0) : 0.0;
  if (!(s1 > 0.0)) return {1.0, 1.0};
  double sk = 0.0;
  for (Index i = std::min<Index>(k, s.size()) - 1; i >= 0 && !(sk > 0.0); --i) sk = s(i);
  double lmin = ctx.lambda_min;
  if (!(lmin > kRankCutoff * ctx.lambda_max)) {
    lmin = 0.0;
    for (Index i = 0; i < ctx.eigen.values.size() && lmin == 0.0; ++i) {
      if (ctx.eigen.values(i) > kRankCutoff * ctx.lambda_max) lmin = ctx.eigen.values(i);
    }
  }
  return analysis::recommended_ranges(s1, sk, ctx.m, lmin);
}

LplrResult lplr_factorize(const Matrix& A, Index k, const HessianContext& ctx, const QuantizerSpec& spec_left,
                          const QuantizerSpec& spec_right, int inner_iterations, const RandomStream& rng,
                          const LplrOptions& options) {
  check_shapes(A, k, ctx);
  if (inner_iterations < 0) throw DomainError("lplr: inner iterations must be nonnegative");
  const std::size_t left_entries = static_cast<std::size_t>(A.rows() * k);
  const std::size_t right_entries = static_cast<std::size_t>(k * A.cols());

  LplrResult out;
  auto record = [&](const Matrix& L, const Matrix& R, std::size_t sat_l, std::size_t sat_r, std::size_t round) {
    double err = proxy_error(Matrix(L * R - A), ctx);
    out.error_trace.push_back(err);
    out.total_saturation.left += sat_l;
    out.total_saturation.right += sat_r;
    out.total_saturation.left_entries += left_entries;
    out.total_saturation.right_entries += right_entries;
    // Strict comparison keeps the earliest of equal-error pairs.
    if (round == 0 || err < out.best_error) {
      out.best_error = err;
      out.best_round = round;
      out.L = L;
      out.R = R;
      out.saturation = {sat_l, sat_r, left_entries, right_entries};
    }
    out.best_trace.push_back(out.best_error);
  };

  LplrInit init = lplr_initial_right(A, k, ctx);
  FactorDraw R = quantize_factor(init.right, spec_right, options.adaptive_ranges, rng.substream(0, 0));
  FactorDraw L = quantize_factor(update_left(A, ctx, R.values, &out.gram_regularizations), spec_left,
                                 options.adaptive_ranges, rng.substream(0, 1));
  record(L.values, R.values, L.saturated, R.saturated, 0);

  for (int i = 1; i <= inner_iterations; ++i) {
    const auto t = static_cast<std::uint64_t>(i);
    R = quantize_factor(update_right(A, ctx, L.values), spec_right, options.adaptive_ranges, rng.substream(t, 0));
    L = quantize_factor(update_left(A, ctx, R.values, &out.gram_regularizations), spec_left,
                        options.adaptive_ranges, rng.substream(t, 1));
    record(L.values, R.values, L.saturated, R.saturated, static_cast<std::size_t>(i));
  }

  out.fallback_used = out.saturation.left_fraction() > options.saturation_threshold ||
                      out.saturation.right_fraction() > options.saturation_threshold;
  if (out.fallback_used && options.strict_fallback) {
    out.fallback_applied = true;
    out.L = Matrix::Zero(A.rows(), k);
    out.R = Matrix::Zero(k, A.cols());
    out.best_error = proxy_error(Matrix(-A), ctx);
  }
  return out;
}

}  // namespace caldera
