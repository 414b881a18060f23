#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "caldera/analysis.hpp"
#include "caldera/hessian.hpp"
#include "caldera/quantizer.hpp"
#include "caldera/random.hpp"
#include "caldera/types.hpp"

namespace caldera {

struct LplrOptions {
  // A factor whose saturated fraction exceeds this triggers the fallback flag.
  double saturation_threshold = 0.01;
  // Return L = 0, R = 0 when the fallback triggers.
  bool strict_fallback = false;
  // Replace each factor quantizer's range by max|entries| of its input on
  // every call (bits kept). Never saturates.
  bool adaptive_ranges = false;
};

struct FactorSaturation {
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t left_entries = 0;
  std::size_t right_entries = 0;

  double left_fraction() const noexcept;
  double right_fraction() const noexcept;
};

struct LplrResult {
  Matrix L;  // n x k
  Matrix R;  // k x d
  std::vector<double> error_trace;  // initialization, then one entry per round
  std::vector<double> best_trace;   // running minimum of error_trace
  double best_error = 0.0;
  std::size_t best_round = 0;
  FactorSaturation saturation;        // of the returned pair
  FactorSaturation total_saturation;  // over every quantization call
  bool fallback_used = false;         // threshold exceeded
  bool fallback_applied = false;      // strict mode zeroed the factors
  std::size_t gram_regularizations = 0;
};

struct LplrInit {
  Matrix right;             // unquantized R0, k x d
  Vector singular_values;   // all singular values of X A^T, descending
};

/// Unquantized right factor of the initialization and the spectrum of X A^T.
///
/// X enters only through X^T X = m H, so an equivalent square factor
/// X_eq = sqrt(m) Lambda^{1/2} U^T (H = U Lambda U^T) is used. With
/// X_eq A^T = U' S V'^T the returned factor is diag(S_k) Q_k^T, where Q_k is the
/// orthonormal polar factor of U Lambda^{-1/2} U'_k. Its row space is that of
/// the optimal rank-k regression solution, its spectral norm is S_1 and its
/// smallest singular value S_k.
LplrInit lplr_initial_right(const Matrix& A, Index k, const HessianContext& ctx);

// sigma_i of X A^T, descending.
Vector calibrated_singular_values(const Matrix& A, const HessianContext& ctx);

// A H R^T (R H R^T)^{-1}; a singular Gram matrix gets 1e-10 trace(G) added.
Matrix update_left(const Matrix& A, const HessianContext& ctx, const Matrix& R,
                   std::size_t* regularized = nullptr);
// L^+ A H H^+ (L^+ A when H H^+ = I).
Matrix update_right(const Matrix& A, const HessianContext& ctx, const Matrix& L);

// Ranges prescribed from the spectrum of X A^T. Where sigma_k or lambda_min
// vanish, the smallest positive value among sigma_1..sigma_k and the smallest
// eigenvalue above the rank cutoff stand in for them.
analysis::FactorRanges default_factor_ranges(const Matrix& A, Index k, const HessianContext& ctx);

/// Alternating low-precision low-rank factorization of A under the proxy
/// ||(L R - A) X^T||_F^2. Each round updates R from the current L, then L
/// from the new R, quantizing after each update; the best pair seen is kept.
LplrResult lplr_factorize(const Matrix& A, Index k, const HessianContext& ctx, const QuantizerSpec& spec_left,
                          const QuantizerSpec& spec_right, int inner_iterations, const RandomStream& rng,
                          const LplrOptions& options = {});

}  // namespace caldera
