#pragma once

#include <optional>

#include "caldera/decompose.hpp"
#include "caldera/hessian.hpp"
#include "json.hpp"

namespace caldera::cli {

inline constexpr int kReportSchemaVersion = 1;

struct BoundReport {
  double quip_trace_bound = 0.0;
  double caldera_bound_exact = 0.0;
  double caldera_bound_mp = 0.0;
  double epsilon = 0.0;
  std::optional<double> recommended_R_L, recommended_R_R;
  std::optional<int> recommended_B_L, recommended_B_R;
  bool rank_feasible = false;
  double avg_bits_factors = 0.0;
  double bits_per_param = 0.0;
  std::string note;  // why recommendations are missing, if they are
};

// Bounds for a finished run. W and ctx are the original (untransformed) inputs.
// epsilon defaults to 5% of the trailing energy sum_{i>k} sigma_i^2(X (W - Q)^T).
BoundReport compute_bounds(const Matrix& W, const HessianContext& ctx, const CalderaResult& result,
                           std::optional<double> epsilon = std::nullopt);

nlohmann::json to_json(const BoundReport& b);
nlohmann::json config_to_json(const DecompositionConfig& cfg);
DecompositionConfig config_from_json(const nlohmann::json& j, DecompositionConfig base = {});

// Everything but wall-clock timings, so reruns produce identical bytes.
nlohmann::json run_report(const Matrix& W, const HessianContext& ctx, const CalderaResult& result,
                          const BoundReport& bounds);
nlohmann::json timings_json(const PhaseTimings& t);

}  // namespace caldera::cli
