#include "report.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "caldera/analysis.hpp"
#include "caldera/errors.hpp"
#include "caldera/lplr.hpp"
#include "caldera/rht.hpp"

namespace caldera::cli {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError("config key '" + key + "': " + e.what());
  }
}

std::optional<double> get_optional_range(const json& j, const std::string& key) {
  if (j.at(key).is_null()) return std::nullopt;
  return get_as<double>(j, key);
}

json vector_json(const std::vector<double>& v) { return json(v); }

}  // namespace

BoundReport compute_bounds(const Matrix& W, const HessianContext& ctx, const CalderaResult& result,
                           std::optional<double> epsilon) {
  const DecompositionConfig& cfg = result.config;
  const Index n = W.rows(), d = W.cols(), k = cfg.rank;
  BoundReport b;

  Matrix Q = result.rht ? rht_inverse(result.Q, *result.rht) : result.Q;
  Vector sigma = calibrated_singular_values(Matrix(W - Q), ctx);
  const Index kk = std::min<Index>(k, sigma.size());
  const double trailing = sigma.tail(sigma.size() - kk).squaredNorm();
  b.epsilon = epsilon.value_or(0.05 * trailing);

  b.quip_trace_bound = analysis::quip_trace_bound(result.first_eta, result.ldl_diagonal);
  const Index kt = std::min<Index>(k, result.first_eta.rows());
  b.caldera_bound_exact = analysis::trailing_eigensum(result.first_eta, result.ldl_diagonal, kt) + b.epsilon;
  b.caldera_bound_mp = analysis::mp_caldera_bound(result.first_eta.rows(), result.first_eta.cols(), ctx.m, kt,
                                                  result.lambda_max, result.first_range_q, cfg.bits_q, b.epsilon);

  const double s1 = sigma.size() > 0 ? sigma(0) : 0.0;
  const double sk = kk > 0 ? sigma(kk - 1) : 0.0;
  b.rank_feasible = k >= 1 && analysis::rank_feasible(k, ctx.m, s1, trailing, ctx.lambda_max, ctx.lambda_min);
  if (k == 0) {
    b.note = "no low-rank factors";
  } else if (!(sk > 0.0) || !(ctx.lambda_min > 0.0)) {
    b.note = "sigma_k or lambda_min is zero";
  } else {
    auto ranges = analysis::recommended_ranges(s1, sk, ctx.m, ctx.lambda_min);
    b.recommended_R_L = ranges.left;
    b.recommended_R_R = ranges.right;
    try {
      auto bits = analysis::recommended_bits(n, d, k, ctx.m, s1, sk, ctx.lambda_max, ctx.lambda_min, b.epsilon,
                                             sigma.squaredNorm());
      b.recommended_B_L = bits.left;
      b.recommended_B_R = bits.right;
    } catch (const RegimeError& e) {
      b.note = e.what();
    }
  }
  if (k > 0) {
    b.avg_bits_factors = (double(cfg.bits_l) * double(n) + double(cfg.bits_r) * double(d)) / double(n + d);
  }
  b.bits_per_param = analysis::bits_per_param_split(n, d, cfg.bits_q, cfg.bits_l, cfg.bits_r, k);
  return b;
}

json to_json(const BoundReport& b) {
  return {
      {"quip_trace_bound", b.quip_trace_bound},
      {"caldera_bound_exact", b.caldera_bound_exact},
      {"caldera_bound_mp", b.caldera_bound_mp},
      {"epsilon", b.epsilon},
      {"recommended_R_L", optional_json(b.recommended_R_L)},
      {"recommended_R_R", optional_json(b.recommended_R_R)},
      {"recommended_B_L", optional_json(b.recommended_B_L)},
      {"recommended_B_R", optional_json(b.recommended_B_R)},
      {"rank_feasible", b.rank_feasible},
      {"avg_bits_factors", b.avg_bits_factors},
      {"bits_per_param", b.bits_per_param},
      {"note", b.note},
  };
}

json config_to_json(const DecompositionConfig& cfg) {
  return {
      {"rank", cfg.rank},
      {"bits_q", cfg.bits_q},
      {"bits_l", cfg.bits_l},
      {"bits_r", cfg.bits_r},
      {"range_q", optional_json(cfg.range_q)},
      {"range_l", optional_json(cfg.range_l)},
      {"range_r", optional_json(cfg.range_r)},
      {"factor_ranges", cfg.adaptive_factor_ranges ? "adaptive" : "prescribed"},
      {"outer_iterations", cfg.outer_iterations},
      {"inner_iterations", cfg.inner_iterations},
      {"seed", cfg.seed},
      {"rht", cfg.use_rht},
      {"hessian_update", cfg.use_hessian_update},
      {"update_order", to_string(cfg.update_order)},
      {"strict_fallback", cfg.strict_fallback},
      {"saturation_threshold", cfg.saturation_threshold},
      {"delta", cfg.delta},
      {"early_stop_tolerance", cfg.early_stop_tolerance},
  };
}

DecompositionConfig config_from_json(const json& j, DecompositionConfig cfg) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  static const std::set<std::string> known = {
      "rank", "bits_q", "bits_l", "bits_r", "range_q", "range_l", "range_r", "factor_ranges",
      "outer_iterations", "inner_iterations", "seed", "rht", "hessian_update", "update_order",
      "strict_fallback", "saturation_threshold", "delta", "early_stop_tolerance"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw DomainError("unknown config key '" + item.key() + "'");
  }
  if (j.contains("rank")) cfg.rank = get_as<Index>(j, "rank");
  if (j.contains("bits_q")) cfg.bits_q = get_as<int>(j, "bits_q");
  if (j.contains("bits_l")) cfg.bits_l = get_as<int>(j, "bits_l");
  if (j.contains("bits_r")) cfg.bits_r = get_as<int>(j, "bits_r");
  if (j.contains("range_q")) cfg.range_q = get_optional_range(j, "range_q");
  if (j.contains("range_l")) cfg.range_l = get_optional_range(j, "range_l");
  if (j.contains("range_r")) cfg.range_r = get_optional_range(j, "range_r");
  if (j.contains("factor_ranges")) {
    auto mode = get_as<std::string>(j, "factor_ranges");
    if (mode != "prescribed" && mode != "adaptive") {
      throw DomainError("factor_ranges must be 'prescribed' or 'adaptive'");
    }
    cfg.adaptive_factor_ranges = mode == "adaptive";
  }
  if (j.contains("outer_iterations")) cfg.outer_iterations = get_as<int>(j, "outer_iterations");
  if (j.contains("inner_iterations")) cfg.inner_iterations = get_as<int>(j, "inner_iterations");
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("rht")) cfg.use_rht = get_as<bool>(j, "rht");
  if (j.contains("hessian_update")) cfg.use_hessian_update = get_as<bool>(j, "hessian_update");
  if (j.contains("update_order")) cfg.update_order = parse_update_order(get_as<std::string>(j, "update_order"));
  if (j.contains("strict_fallback")) cfg.strict_fallback = get_as<bool>(j, "strict_fallback");
  if (j.contains("saturation_threshold")) cfg.saturation_threshold = get_as<double>(j, "saturation_threshold");
  if (j.contains("delta")) cfg.delta = get_as<double>(j, "delta");
  if (j.contains("early_stop_tolerance")) cfg.early_stop_tolerance = get_as<double>(j, "early_stop_tolerance");
  return cfg;
}

json run_report(const Matrix& W, const HessianContext& ctx, const CalderaResult& result, const BoundReport& bounds) {
  const auto& s = result.saturation;
  json inner = json::array();
  for (const auto& t : result.inner_best_traces) inner.push_back(vector_json(t));
  return {
      {"schema_version", kReportSchemaVersion},
      {"seed", result.config.seed},
      {"config", config_to_json(result.config)},
      {"shape", {{"n", W.rows()}, {"d", W.cols()}, {"m", ctx.m}}},
      {"error_trace", vector_json(result.error_trace)},
      {"best_trace", vector_json(result.best_trace)},
      {"inner_best_traces", inner},
      {"best_error", result.best_error},
      {"best_iteration", result.best_iteration},
      {"saturation",
       {{"backbone", s.backbone},
        {"left", s.left},
        {"right", s.right},
        {"fallback_events", s.fallback_events},
        {"gram_regularizations", s.gram_regularizations},
        {"best_backbone", s.best_backbone},
        {"best_left", s.best_left},
        {"best_right", s.best_right}}},
      {"bounds", to_json(bounds)},
  };
}

json timings_json(const PhaseTimings& t) {
  return {{"hessian_update_seconds", t.hessian_update},
          {"ldlq_seconds", t.ldlq},
          {"lplr_seconds", t.lplr},
          {"total_seconds", t.total}};
}

}  // namespace caldera::cli
