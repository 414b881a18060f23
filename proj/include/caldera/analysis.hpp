#pragma once

#include <utility>
#include <vector>

#include "caldera/types.hpp"

namespace caldera::analysis {

/// Closed-form expected error of the full decomposition, Marchenko-Pastur form:
///   4 m d lambda_max R^2 / (pi (2^B_Q - 1)^2) * (1 - k/n) * (n - k/2) + epsilon
double mp_caldera_bound(Index n, Index d, Index m, Index k, double lambda_max, double R, int B_Q,
                        double epsilon);

/// Informal per-entry variant, normalized by n*m:
///   4 d lambda_max R^2 / (pi (2^B_Q - 1)^2) * (1 - k/(2n))^2 + epsilon
double mp_caldera_bound_informal(Index n, Index d, Index k, double lambda_max, double R, int B_Q,
                                 double epsilon);

struct FactorRanges {
  double left = 0.0;
  double right = 0.0;
};

// R_R = sigma1, R_L = 2 sigma1 / (sigmak sqrt(m lambda_min)).
FactorRanges recommended_ranges(double sigma1, double sigmak, Index m, double lambda_min);

struct FactorBits {
  int left = 0;
  int right = 0;
  // Unrounded budgets.
  double left_exact = 0.0;
  double right_b1 = 0.0;
  double right_b2 = 0.0;
};

// Upper end of the admissible epsilon window: 4 m k lambda_max^2 sigma1 / lambda_min.
double epsilon_upper_limit(Index m, Index k, double sigma1, double lambda_max, double lambda_min);

/// Bit budgets for the left and right factor quantizers.
/// sum_sigma_sq is the sum of all squared singular values of X A^T.
/// Throws RegimeError when epsilon is outside (0, epsilon_upper_limit].
FactorBits recommended_bits(Index n, Index d, Index k, Index m, double sigma1, double sigmak,
                            double lambda_max, double lambda_min, double epsilon, double sum_sigma_sq,
                            double C = 1.0);

bool rank_feasible(Index k, Index m, double sigma1, double trailing_sq, double lambda_max, double lambda_min);

using LayerDims = std::vector<std::pair<Index, Index>>;

// Average stored bits per original weight; r_ft columns of the factors kept at 16 bits.
double bits_per_param(const LayerDims& layer_dims, int B_Q, int B_LR, Index k, Index r_ft = 0);

// Same accounting with separate left/right budgets (no 16-bit slice).
double bits_per_param_split(Index n, Index d, int B_Q, int B_L, int B_R, Index k);

// trace(eta diag(D) eta^T)
double quip_trace_bound(const Matrix& eta, const Vector& D);

// Eigenvalues of eta diag(D) eta^T, descending (clamped at zero).
Vector eta_gram_eigenvalues(const Matrix& eta, const Vector& D);

// Sum of all but the k largest eigenvalues of eta diag(D) eta^T.
double trailing_eigensum(const Matrix& eta, const Vector& D, Index k);

// Regime (i): smallest backbone budget for which the error is at most epsilon.
//   log2(2 R (pi epsilon)^{-1/2} sqrt(n m d lambda_max) + 1)
double regime_backbone_bits(Index n, Index m, Index d, double R, double lambda_max, double epsilon);

// Regime (ii): rank above which the error is at most epsilon.
//   2n - (2^B_Q - 1) R^{-1} (pi epsilon)^{1/2} (m d lambda_max^{-1/2}) sqrt(n)
double regime_rank_threshold(Index n, Index m, Index d, double R, double lambda_max, double epsilon, int B_Q);

// Informal average factor budget:
//   (1/2) log2(k sigma1^3 / (m epsilon sigmak) * lambda_max / lambda_min * sqrt(d / n))
double informal_factor_bits(Index n, Index d, Index k, Index m, double sigma1, double sigmak,
                            double lambda_max, double lambda_min, double epsilon);

}  // namespace caldera::analysis
