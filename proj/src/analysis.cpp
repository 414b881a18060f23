#include "caldera/analysis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "caldera/errors.hpp"
#include "caldera/linalg.hpp"

namespace caldera::analysis {

namespace {

double levels_minus_one(int B) {
  if (B < 1 || B > 62) throw DomainError("bit budget must be in [1, 62]");
  return std::ldexp(1.0, B) - 1.0;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be nonnegative and finite");
}

void check_eta_shapes(const Matrix& eta, const Vector& D) {
  if (eta.cols() != D.size()) throw ShapeError("eta has " + std::to_string(eta.cols()) + " columns but D has " +
                                               std::to_string(D.size()) + " entries");
}

}  // namespace

double mp_caldera_bound(Index n, Index d, Index m, Index k, double lambda_max, double R, int B_Q,
                        double epsilon) {
  if (n < 1 || d < 1 || m < 1) throw DomainError("mp_caldera_bound: dimensions must be positive");
  if (k < 0 || k > n) throw DomainError("mp_caldera_bound: k must be in [0, n]");
  require_nonnegative(lambda_max, "lambda_max");
  require_nonnegative(R, "R");
  require_nonnegative(epsilon, "epsilon");
  const double q = levels_minus_one(B_Q);
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  const double lead = 4.0 * static_cast<double>(m) * static_cast<double>(d) * lambda_max * R * R /
                      (std::numbers::pi * q * q);
  return lead * (1.0 - kk / nn) * (nn - kk / 2.0) + epsilon;
}

double mp_caldera_bound_informal(Index n, Index d, Index k, double lambda_max, double R, int B_Q,
                                 double epsilon) {
  if (n < 1 || d < 1) throw DomainError("mp_caldera_bound_informal: dimensions must be positive");
  if (k < 0 || k > n) throw DomainError("mp_caldera_bound_informal: k must be in [0, n]");
  require_nonnegative(lambda_max, "lambda_max");
  require_nonnegative(R, "R");
  require_nonnegative(epsilon, "epsilon");
  const double q = levels_minus_one(B_Q);
  const double shrink = 1.0 - static_cast<double>(k) / (2.0 * static_cast<double>(n));
  return 4.0 * static_cast<double>(d) * lambda_max * R * R / (std::numbers::pi * q * q) * shrink * shrink +
         epsilon;
}

FactorRanges recommended_ranges(double sigma1, double sigmak, Index m, double lambda_min) {
  require_positive(sigma1, "sigma1");
  require_positive(sigmak, "sigmak");
  require_positive(lambda_min, "lambda_min");
  if (m < 1) throw DomainError("recommended_ranges: m must be positive");
  if (sigmak > sigma1) throw DomainError("recommended_ranges: sigmak exceeds sigma1");
  FactorRanges out;
  out.right = sigma1;
  out.left = 2.0 * sigma1 / (sigmak * std::sqrt(static_cast<double>(m) * lambda_min));
  return out;
}

double epsilon_upper_limit(Index m, Index k, double sigma1, double lambda_max, double lambda_min) {
  require_positive(lambda_min, "lambda_min");
  return 4.0 * static_cast<double>(m) * static_cast<double>(k) * lambda_max * lambda_max * sigma1 / lambda_min;
}

FactorBits recommended_bits(Index n, Index d, Index k, Index m, double sigma1, double sigmak,
                            double lambda_max, double lambda_min, double epsilon, double sum_sigma_sq,
                            double C) {
  if (n < 1 || d < 1 || k < 1 || m < 1) throw DomainError("recommended_bits: dimensions must be positive");
  require_positive(sigma1, "sigma1");
  require_positive(sigmak, "sigmak");
  require_positive(lambda_max, "lambda_max");
  require_positive(lambda_min, "lambda_min");
  require_positive(sum_sigma_sq, "sum_sigma_sq");
  require_positive(C, "C");
  const double eps_max = epsilon_upper_limit(m, k, sigma1, lambda_max, lambda_min);
  if (!(epsilon > 0.0) || epsilon > eps_max) {
    throw RegimeError("recommended_bits: epsilon " + std::to_string(epsilon) + " outside (0, " +
                      std::to_string(eps_max) + "]");
  }
  const double kappa_sq = lambda_max / lambda_min;
  const double nn = static_cast<double>(n), dd = static_cast<double>(d), kk = static_cast<double>(k);

  FactorBits out;
  out.left_exact = std::log2(4.0 * sigma1 * sigma1 / sigmak * std::sqrt(nn * kk / epsilon * kappa_sq) + 1.0);
  out.right_b1 = std::log2(2.0 * sigma1 * std::sqrt(kk * dd / epsilon * kappa_sq) + 1.0);
  const double tail_log = std::log(8.0 * sum_sigma_sq / epsilon);
  out.right_b2 = std::log2(4.0 * C * sigma1 / (sigmak * std::numbers::ln2) *
                           (std::sqrt(dd) + std::sqrt(kk) + std::sqrt(std::max(tail_log, 0.0))));
  out.left = std::max(1, static_cast<int>(std::ceil(out.left_exact)));
  out.right = std::max(1, static_cast<int>(std::ceil(std::max(out.right_b1, out.right_b2))));
  return out;
}

bool rank_feasible(Index k, Index m, double sigma1, double trailing_sq, double lambda_max, double lambda_min) {
  if (k > m || k < 0) return false;
  if (!(sigma1 > 0.0) || !(lambda_max > 0.0)) return trailing_sq <= 0.0;
  const double lower = std::sqrt(lambda_min) /
                       (4.0 * static_cast<double>(m) * sigma1 * std::pow(lambda_max, 1.5)) * trailing_sq;
  return lower <= static_cast<double>(k);
}

double bits_per_param(const LayerDims& layer_dims, int B_Q, int B_LR, Index k, Index r_ft) {
  if (layer_dims.empty()) throw DomainError("bits_per_param: no layers given");
  if (B_Q < 1 || B_LR < 1) throw DomainError("bits_per_param: bit budgets must be positive");
  if (k < 0 || r_ft < 0 || r_ft > k) throw DomainError("bits_per_param: need 0 <= r_ft <= k");
  double stored = 0.0, weights = 0.0;
  for (const auto& [n, d] : layer_dims) {
    if (n < 1 || d < 1) throw DomainError("bits_per_param: layer dimensions must be positive");
    const double nd = static_cast<double>(n) * static_cast<double>(d);
    const double side = static_cast<double>(n + d);
    stored += B_Q * nd + static_cast<double>(k - r_ft) * B_LR * side + 16.0 * static_cast<double>(r_ft) * side;
    weights += nd;
  }
  return stored / weights;
}

double bits_per_param_split(Index n, Index d, int B_Q, int B_L, int B_R, Index k) {
  if (n < 1 || d < 1 || k < 0) throw DomainError("bits_per_param_split: bad dimensions");
  const double nd = static_cast<double>(n) * static_cast<double>(d);
  return (B_Q * nd + static_cast<double>(k) * (B_L * static_cast<double>(n) + B_R * static_cast<double>(d))) / nd;
}

double quip_trace_bound(const Matrix& eta, const Vector& D) {
  check_eta_shapes(eta, D);
  return (eta.array().square().rowwise() * D.transpose().array()).sum();
}

Vector eta_gram_eigenvalues(const Matrix& eta, const Vector& D) {
  check_eta_shapes(eta, D);
  if (eta.rows() == 0) return Vector();
  Matrix G = eta * D.asDiagonal() * eta.transpose();
  Vector ev = symmetric_eigen(G).values.reverse();
  return ev.cwiseMax(0.0);
}

double trailing_eigensum(const Matrix& eta, const Vector& D, Index k) {
  check_eta_shapes(eta, D);
  if (k < 0 || k > eta.rows()) throw DomainError("trailing_eigensum: k must be in [0, n]");
  if (k == 0) return quip_trace_bound(eta, D);
  Vector ev = eta_gram_eigenvalues(eta, D);
  return ev.tail(ev.size() - k).sum();
}

double regime_backbone_bits(Index n, Index m, Index d, double R, double lambda_max, double epsilon) {
  require_positive(epsilon, "epsilon");
  require_nonnegative(R, "R");
  require_nonnegative(lambda_max, "lambda_max");
  const double nmd = static_cast<double>(n) * static_cast<double>(m) * static_cast<double>(d);
  return std::log2(2.0 * R / std::sqrt(std::numbers::pi * epsilon) * std::sqrt(nmd * lambda_max) + 1.0);
}

double regime_rank_threshold(Index n, Index m, Index d, double R, double lambda_max, double epsilon, int B_Q) {
  require_positive(epsilon, "epsilon");
  require_positive(R, "R");
  require_positive(lambda_max, "lambda_max");
  const double q = levels_minus_one(B_Q);
  const double nn = static_cast<double>(n);
  return 2.0 * nn - q / R * std::sqrt(std::numbers::pi * epsilon) *
                        (static_cast<double>(m) * static_cast<double>(d) / std::sqrt(lambda_max)) * std::sqrt(nn);
}

double informal_factor_bits(Index n, Index d, Index k, Index m, double sigma1, double sigmak,
                            double lambda_max, double lambda_min, double epsilon) {
  require_positive(sigma1, "sigma1");
  require_positive(sigmak, "sigmak");
  require_positive(lambda_min, "lambda_min");
  require_positive(epsilon, "epsilon");
  const double arg = static_cast<double>(k) * sigma1 * sigma1 * sigma1 /
                     (static_cast<double>(m) * epsilon * sigmak) * (lambda_max / lambda_min) *
                     std::sqrt(static_cast<double>(d) / static_cast<double>(n));
  return 0.5 * std::log2(arg);
}

}  // namespace caldera::analysis
