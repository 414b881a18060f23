#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "caldera/cmat.hpp"
#include "caldera/errors.hpp"
#include "caldera/hessian.hpp"
#include "caldera/rht.hpp"
#include "report.hpp"

namespace caldera::cli {

using nlohmann::json;

int exit_code_for_current_exception() noexcept {
  try {
    throw;
  } catch (const FormatError& e) {
    spdlog::error("format error: {}", e.what());
    return kExitFormat;
  } catch (const ShapeError& e) {
    spdlog::error("shape error: {}", e.what());
    return kExitShape;
  } catch (const RegimeError& e) {
    spdlog::error("regime error: {}", e.what());
    return kExitRegime;
  } catch (const DomainError& e) {
    spdlog::error("domain error: {}", e.what());
    return kExitDomain;
  } catch (const FactorizationError& e) {
    spdlog::error("factorization error at pivot {}: {}", e.pivot(), e.what());
    return kExitFactorization;
  } catch (const IoError& e) {
    spdlog::error("i/o error: {}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  } catch (...) {
    spdlog::error("internal error: unknown exception");
    return kExitInternal;
  }
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

void cmd_synth(const SynthOptions& opts, const fs::path& out_path) {
  Matrix W = synthesize_matrix(opts.kind, opts.n, opts.d, opts.params, opts.seed);
  write_cmat(out_path, W);
  spdlog::info("synth: wrote {}x{} {} matrix to {}", W.rows(), W.cols(), to_string(opts.kind), out_path.string());
}

fs::path hessian_factor_path(const fs::path& h_path) {
  return h_path.parent_path() / (h_path.stem().string() + ".ldl.cmat");
}

fs::path hessian_meta_path(const fs::path& h_path) {
  return h_path.parent_path() / (h_path.stem().string() + ".json");
}

json read_json(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

HessianContext cmd_hessian(const fs::path& x_path, std::optional<double> delta, const fs::path& out_path) {
  Matrix X = read_cmat(x_path);
  if (X.rows() < 1 || X.cols() < 1) throw ShapeError("calibration matrix must be nonempty");
  const double used = delta ? *delta : default_regularization(Matrix(X.transpose() * X / double(X.rows())));
  HessianContext ctx = compute_hessian(X, used);
  write_cmat(out_path, ctx.H);
  write_cmat(hessian_factor_path(out_path), ctx.M);
  json meta = {
      {"schema_version", kReportSchemaVersion},
      {"m", ctx.m},
      {"d", ctx.dim()},
      {"delta", used},
      {"lambda_max", ctx.lambda_max},
      {"lambda_min", ctx.lambda_min},
      {"D", std::vector<double>(ctx.D.data(), ctx.D.data() + ctx.D.size())},
  };
  write_text(hessian_meta_path(out_path), meta.dump(2) + "\n");
  spdlog::info("hessian: m = {}, d = {}, delta = {}", ctx.m, ctx.dim(), used);
  return ctx;
}

DecompositionConfig apply_overrides(DecompositionConfig cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.rht) cfg.use_rht = *o.rht;
  if (o.hessian_update) cfg.use_hessian_update = *o.hessian_update;
  if (o.strict_fallback) cfg.strict_fallback = *o.strict_fallback;
  if (o.update_order) cfg.update_order = *o.update_order;
  if (o.delta) cfg.delta = *o.delta;
  if (o.adaptive_factor_ranges) cfg.adaptive_factor_ranges = *o.adaptive_factor_ranges;
  return cfg;
}

HessianContext load_hessian(const fs::path& h_path, const Overrides& o) {
  Matrix H = read_cmat(h_path);
  if (H.rows() != H.cols()) {
    throw ShapeError("Hessian must be square, got " + std::to_string(H.rows()) + "x" + std::to_string(H.cols()));
  }
  Index m = 0;
  if (o.calibration_rows) {
    m = *o.calibration_rows;
  } else if (fs::exists(hessian_meta_path(h_path))) {
    json meta = read_json(hessian_meta_path(h_path));
    try {
      m = meta.at("m").get<Index>();
    } catch (const json::exception& e) {
      throw FormatError(hessian_meta_path(h_path).string() + ": " + e.what(), 0);
    }
  } else {
    throw DomainError("calibration row count unknown: no " + hessian_meta_path(h_path).string() + " and no --m");
  }
  if (m < 1) throw DomainError("calibration row count must be positive");
  return hessian_context(H, m, o.delta.value_or(0.0));
}

DecomposeOutput cmd_decompose(const fs::path& w_path, const fs::path& h_path, const std::optional<fs::path>& config_path,
                              const fs::path& out_dir, const Overrides& o) {
  Matrix W = read_cmat(w_path);
  DecompositionConfig cfg;
  if (config_path) cfg = config_from_json(read_json(*config_path));
  cfg = apply_overrides(cfg, o);
  HessianContext ctx = load_hessian(h_path, o);
  if (W.cols() != ctx.dim()) {
    throw ShapeError("W has " + std::to_string(W.cols()) + " columns but H is " + std::to_string(ctx.dim()) + "x" +
                     std::to_string(ctx.dim()));
  }

  DecomposeOutput out;
  out.result = caldera_decompose(W, ctx, cfg);
  const CalderaResult& r = out.result;
  BoundReport bounds = compute_bounds(W, ctx, r);
  out.report = run_report(W, ctx, r, bounds);

  fs::create_directories(out_dir);
  write_cmat(out_dir / "Q.cmat", r.Q);
  write_cmat(out_dir / "L.cmat", r.L);
  write_cmat(out_dir / "R.cmat", r.R);
  write_cmat(out_dir / "W_hat.cmat", r.reconstruction());
  write_text(out_dir / "report.json", out.report.dump(2) + "\n");
  write_text(out_dir / "timings.json", timings_json(r.timings).dump(2) + "\n");
  spdlog::info("decompose: best error {} at iteration {}", r.best_error, r.best_iteration);
  return out;
}

namespace {

template <typename T>
std::vector<T> axis(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return {fallback};
  try {
    auto v = j.at(key).get<std::vector<T>>();
    if (v.empty()) throw DomainError(std::string("grid axis '") + key + "' is empty");
    return v;
  } catch (const json::exception& e) {
    throw DomainError(std::string("grid axis '") + key + "': " + e.what());
  }
}

}  // namespace

SweepGrid parse_grid(const json& j) {
  if (!j.is_object()) throw DomainError("grid must be a JSON object");
  for (const auto& item : j.items()) {
    static const std::vector<std::string> known = {"base", "rank", "bits_q", "bits_l", "bits_r", "seeds"};
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw DomainError("unknown grid key '" + item.key() + "'");
    }
  }
  SweepGrid g;
  if (j.contains("base")) g.base = config_from_json(j.at("base"));
  auto ranks = axis<Index>(j, "rank", g.base.rank);
  auto bq = axis<int>(j, "bits_q", g.base.bits_q);
  auto bl = axis<int>(j, "bits_l", g.base.bits_l);
  auto br = axis<int>(j, "bits_r", g.base.bits_r);
  auto seeds = axis<std::uint64_t>(j, "seeds", g.base.seed);
  for (Index k : ranks)
    for (int q : bq)
      for (int l : bl)
        for (int r : br)
          for (auto s : seeds) g.cells.push_back({k, q, l, r, s});
  auto key = [](const SweepCell& c) { return std::tie(c.rank, c.bits_q, c.bits_l, c.bits_r, c.seed); };
  std::sort(g.cells.begin(), g.cells.end(), [&](const SweepCell& a, const SweepCell& b) { return key(a) < key(b); });
  g.cells.erase(std::unique(g.cells.begin(), g.cells.end(),
                            [&](const SweepCell& a, const SweepCell& b) { return key(a) == key(b); }),
                g.cells.end());
  return g;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "rank", "bits_q", "bits_l", "bits_r", "seed", "best_error", "best_iteration", "quip_trace_bound",
      "caldera_bound_exact", "caldera_bound_mp", "saturation_backbone", "saturation_left", "saturation_right",
      "fallback_events", "bits_per_param"};
  return cols;
}

std::vector<std::vector<std::string>> run_sweep(const Matrix& W, const HessianContext& ctx, const SweepGrid& grid,
                                                int jobs) {
  const std::size_t count = grid.cells.size();
  std::vector<std::vector<std::string>> rows(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        const SweepCell& c = grid.cells[i];
        DecompositionConfig cfg = grid.base;
        cfg.rank = c.rank;
        cfg.bits_q = c.bits_q;
        cfg.bits_l = c.bits_l;
        cfg.bits_r = c.bits_r;
        cfg.seed = c.seed;
        CalderaResult r = caldera_decompose(W, ctx, cfg);
        BoundReport b = compute_bounds(W, ctx, r);
        const auto& s = r.saturation;
        rows[i] = {std::to_string(c.rank), std::to_string(c.bits_q), std::to_string(c.bits_l),
                   std::to_string(c.bits_r), std::to_string(c.seed), format_double(r.best_error),
                   std::to_string(r.best_iteration), format_double(b.quip_trace_bound),
                   format_double(b.caldera_bound_exact), format_double(b.caldera_bound_mp),
                   std::to_string(s.best_backbone), std::to_string(s.best_left), std::to_string(s.best_right),
                   std::to_string(s.fallback_events), format_double(b.bits_per_param)};
        spdlog::debug("sweep cell {}/{} done", i + 1, count);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void cmd_sweep(const fs::path& w_path, const fs::path& h_path, const fs::path& grid_path, const fs::path& out_csv,
               int jobs, const Overrides& o) {
  Matrix W = read_cmat(w_path);
  Overrides base_o = o;
  base_o.seed.reset();  // seeds come from the grid
  SweepGrid grid = parse_grid(read_json(grid_path));
  grid.base = apply_overrides(grid.base, base_o);
  HessianContext ctx = load_hessian(h_path, o);
  if (W.cols() != ctx.dim()) throw ShapeError("W and H dimensions disagree");

  auto rows = run_sweep(W, ctx, grid, jobs);
  std::string csv;
  const auto& cols = sweep_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) csv += (c ? "," : "") + cols[c];
  csv += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) csv += (c ? "," : "") + row[c];
    csv += "\n";
  }
  write_text(out_csv, csv);
  spdlog::info("sweep: {} cells written to {}", rows.size(), out_csv.string());
}

}  // namespace caldera::cli
