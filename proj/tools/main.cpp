#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "caldera/errors.hpp"
#include "commands.hpp"

using namespace caldera;
using namespace caldera::cli;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("caldera");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CALDERA_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

struct DecomposeFlags {
  std::string w, h, out;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  bool rht = false, hessian_update = false, strict_fallback = false;
  std::optional<std::string> update_order, factor_ranges;
  std::optional<double> delta;
  std::optional<Index> m;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--weights", w, "weight matrix W (.cmat)")->required();
    cmd->add_option("--hessian", h, "Hessian (.cmat) written by `caldera hessian`")->required();
    cmd->add_option("--seed", seed, "overrides the config seed");
    cmd->add_flag("--rht", rht, "randomized Hadamard transform on W and H");
    cmd->add_flag("--hessian-update", hessian_update, "LDLQ against the deflated Hessian");
    cmd->add_flag("--strict-fallback", strict_fallback, "zero saturated factors");
    cmd->add_option("--update-order", update_order, "q_first or lr_first");
    cmd->add_option("--factor-ranges", factor_ranges, "prescribed or adaptive");
    cmd->add_option("--delta", delta, "extra diagonal added to H");
    cmd->add_option("--m", m, "calibration rows, if H has no metadata");
  }

  Overrides overrides() const {
    Overrides o;
    o.seed = seed;
    if (rht) o.rht = true;
    if (hessian_update) o.hessian_update = true;
    if (strict_fallback) o.strict_fallback = true;
    if (update_order) o.update_order = parse_update_order(*update_order);
    if (factor_ranges) {
      if (*factor_ranges != "prescribed" && *factor_ranges != "adaptive") {
        throw DomainError("--factor-ranges must be prescribed or adaptive");
      }
      o.adaptive_factor_ranges = *factor_ranges == "adaptive";
    }
    o.delta = delta;
    o.calibration_rows = m;
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"CALDERA: low-rank plus quantized weight decomposition"};
  app.require_subcommand(1);

  SynthOptions synth;
  std::string synth_kind = "decaying_power", synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a matrix with a prescribed spectrum");
  synth_cmd->add_option("--kind", synth_kind, "decaying_power, decaying_exp or lowrank_plus_noise");
  synth_cmd->add_option("--n", synth.n, "rows")->required();
  synth_cmd->add_option("--d", synth.d, "columns")->required();
  synth_cmd->add_option("--power", synth.params.power, "sigma_i = i^-power");
  synth_cmd->add_option("--rho", synth.params.rho, "sigma_i = rho^i");
  synth_cmd->add_option("--rank", synth.params.rank, "rank of the low-rank part");
  synth_cmd->add_option("--noise", synth.params.noise, "noise level tau");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--out", synth_out, "output .cmat")->required();

  std::string x_path, h_out, delta_text = "auto";
  auto* hess_cmd = app.add_subcommand("hessian", "H = X^T X / m + delta I from calibration inputs");
  hess_cmd->add_option("--x", x_path, "calibration matrix X (m x d, .cmat)")->required();
  hess_cmd->add_option("--delta", delta_text, "diagonal regularization, or 'auto'");
  hess_cmd->add_option("--out", h_out, "output .cmat")->required();

  DecomposeFlags dec;
  auto* dec_cmd = app.add_subcommand("decompose", "W ~ Q + L R");
  dec.add_to(dec_cmd);
  dec_cmd->add_option("--config", dec.config, "JSON config");
  dec_cmd->add_option("--out-dir", dec.out, "output directory")->required();

  DecomposeFlags sw;
  std::string grid_path;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of decompositions to CSV");
  sw.add_to(sweep_cmd);
  sweep_cmd->add_option("--grid", grid_path, "JSON grid")->required();
  sweep_cmd->add_option("--out", sw.out, "output CSV")->required();
  sweep_cmd->add_option("--jobs", jobs, "concurrent cells")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      synth.kind = parse_spectrum_kind(synth_kind);
      cmd_synth(synth, synth_out);
    } else if (*hess_cmd) {
      std::optional<double> delta;
      if (delta_text != "auto") {
        std::size_t used = 0;
        try {
          delta = std::stod(delta_text, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != delta_text.size()) {
          spdlog::error("--delta must be a number or 'auto'");
          return kExitUsage;
        }
      }
      cmd_hessian(x_path, delta, h_out);
    } else if (*dec_cmd) {
      std::optional<fs::path> config;
      if (dec.config) config = *dec.config;
      cmd_decompose(dec.w, dec.h, config, dec.out, dec.overrides());
    } else if (*sweep_cmd) {
      cmd_sweep(sw.w, sw.h, grid_path, sw.out, jobs, sw.overrides());
    }
  } catch (...) {
    return exit_code_for_current_exception();
  }
  return kExitOk;
}
