#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "caldera/decompose.hpp"
#include "caldera/synth.hpp"
#include "json.hpp"

namespace caldera::cli {

namespace fs = std::filesystem;

// Process exit codes. Stable; documented in the README.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitFormat = 3,
  kExitShape = 4,
  kExitRegime = 5,
  kExitDomain = 6,
  kExitFactorization = 7,
  kExitIo = 8,
};

// Maps the in-flight exception to an exit code; call from inside a catch block.
int exit_code_for_current_exception() noexcept;

struct SynthOptions {
  SpectrumKind kind = SpectrumKind::decaying_power;
  Index n = 0, d = 0;
  SynthParams params;
  std::uint64_t seed = 0;
};

void cmd_synth(const SynthOptions& opts, const fs::path& out_path);

// delta unset means default_regularization(X^T X / m).
// Writes H to out_path, the LDL feedback of m H to <stem>.ldl.cmat and
// metadata (m, d, delta, lambda extremes, D) to <stem>.json.
HessianContext cmd_hessian(const fs::path& x_path, std::optional<double> delta, const fs::path& out_path);

fs::path hessian_factor_path(const fs::path& h_path);
fs::path hessian_meta_path(const fs::path& h_path);

// Flag-level overrides applied on top of the JSON config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<bool> rht, hessian_update, strict_fallback;
  std::optional<UpdateOrder> update_order;
  std::optional<double> delta;
  std::optional<bool> adaptive_factor_ranges;
  std::optional<Index> calibration_rows;  // m, when H has no metadata sidecar
};

DecompositionConfig apply_overrides(DecompositionConfig cfg, const Overrides& o);

nlohmann::json read_json(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// H (plus m from the sidecar or overrides) into a context; overrides.delta is added to the diagonal.
HessianContext load_hessian(const fs::path& h_path, const Overrides& o);

struct DecomposeOutput {
  CalderaResult result;
  nlohmann::json report;
};

// Writes Q, L, R, W_hat (.cmat), report.json and timings.json into out_dir.
DecomposeOutput cmd_decompose(const fs::path& w_path, const fs::path& h_path, const std::optional<fs::path>& config_path,
                              const fs::path& out_dir, const Overrides& o = {});

struct SweepCell {
  Index rank = 0;
  int bits_q = 2, bits_l = 8, bits_r = 8;
  std::uint64_t seed = 0;
};

struct SweepGrid {
  DecompositionConfig base;
  std::vector<SweepCell> cells;  // sorted by (k, B_Q, B_L, B_R, seed)
};

// {"base": {...config...}, "rank": [...], "bits_q": [...], "bits_l": [...], "bits_r": [...], "seeds": [...]}
SweepGrid parse_grid(const nlohmann::json& j);

const std::vector<std::string>& sweep_columns();

// One CSV row per cell, in grid order; cells run on up to `jobs` threads.
std::vector<std::vector<std::string>> run_sweep(const Matrix& W, const HessianContext& ctx, const SweepGrid& grid,
                                                int jobs);

void cmd_sweep(const fs::path& w_path, const fs::path& h_path, const fs::path& grid_path, const fs::path& out_csv,
               int jobs, const Overrides& o = {});

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace caldera::cli
