#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caldera/hessian.hpp"
#include "caldera/lplr.hpp"
#include "caldera/random.hpp"
#include "caldera/rht.hpp"
#include "caldera/types.hpp"

namespace caldera {

enum class UpdateOrder { q_first, lr_first };

enum class Phase : std::uint64_t { backbone = 0, factors = 1 };

struct DecompositionConfig {
  Index rank = 0;  // k; 0 disables the low-rank factors
  int bits_q = 2;
  int bits_l = 8;
  int bits_r = 8;
  std::optional<double> range_q;  // default max|input| per LDLQ call
  std::optional<double> range_l;  // default from the spectrum of X (W - Q)^T
  std::optional<double> range_r;
  bool adaptive_factor_ranges = false;  // max|entries| per factor quantization
  int outer_iterations = 15;
  int inner_iterations = 10;
  std::uint64_t seed = 0;
  bool use_rht = false;
  bool use_hessian_update = false;
  UpdateOrder update_order = UpdateOrder::q_first;
  bool strict_fallback = false;
  double saturation_threshold = 0.01;
  // Regularization added by callers that build the context from X or H; also
  // the padding diagonal under RHT (a trace-relative default is used when 0).
  double delta = 0.0;
  // Stop when an outer iteration improves the best error by less than this
  // relative amount. 0 runs all outer iterations.
  double early_stop_tolerance = 0.0;

  void validate() const;
};

const char* to_string(UpdateOrder order) noexcept;
UpdateOrder parse_update_order(const std::string& text);

// Stream used for phase `phase` of outer iteration t (1-based).
RandomStream phase_stream(std::uint64_t seed, int t, Phase phase);

struct SaturationSummary {
  std::size_t backbone = 0;       // summed over outer iterations
  std::size_t left = 0;           // over every factor quantization call
  std::size_t right = 0;
  std::size_t fallback_events = 0;
  std::size_t gram_regularizations = 0;
  // Counts for the returned triple.
  std::size_t best_backbone = 0;
  std::size_t best_left = 0;
  std::size_t best_right = 0;
};

struct PhaseTimings {
  double hessian_update = 0.0;
  double ldlq = 0.0;
  double lplr = 0.0;
  double total = 0.0;
};

struct CalderaResult {
  // With RHT these live in transformed (padded) coordinates; see reconstruction().
  Matrix Q, L, R;
  double best_error = 0.0;
  std::size_t best_iteration = 0;  // 1-based outer iteration of the returned triple
  std::vector<double> error_trace;  // per outer iteration
  std::vector<double> best_trace;   // running minimum
  std::vector<std::vector<double>> inner_best_traces;
  SaturationSummary saturation;
  DecompositionConfig config;
  PhaseTimings timings;
  std::optional<RhtContext> rht;

  // From the first LDLQ call; used by the bound report.
  Matrix first_eta;
  double first_range_q = 0.0;
  Vector ldl_diagonal;    // D of the context used by the first LDLQ call
  double lambda_max = 0.0;
  Index calibration_rows = 0;

  // Q + L R in the original coordinates.
  Matrix reconstruction() const;
};

// Proxy error ||(Q + L R - W) X^T||_F^2 in the context's coordinates.
double decomposition_error(const Matrix& W, const Matrix& Q, const Matrix& L, const Matrix& R,
                           const HessianContext& ctx);

/// H~ = H - M_c V V^T M_c^T with H = M_c M_c^T and L R M_c = U S V^T.
HessianContext hessian_update(const HessianContext& ctx, const Matrix& L, const Matrix& R);

CalderaResult caldera_decompose(const Matrix& W, const HessianContext& ctx, const DecompositionConfig& cfg);

}  // namespace caldera
