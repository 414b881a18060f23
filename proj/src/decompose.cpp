#include "caldera/decompose.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <string>

#include "caldera/errors.hpp"
#include "caldera/ldlq.hpp"
#include "caldera/linalg.hpp"

namespace caldera {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix low_rank_product(const Matrix& L, const Matrix& R, Index rows, Index cols) {
  if (L.cols() == 0) return Matrix::Zero(rows, cols);
  return L * R;
}

void check_positive_range(const std::optional<double>& r, const char* name) {
  if (r && (!(*r > 0.0) || !std::isfinite(*r))) throw DomainError(std::string(name) + " must be positive");
}

}  // namespace

void DecompositionConfig::validate() const {
  if (rank < 0) throw DomainError("config: rank must be nonnegative");
  for (int b : {bits_q, bits_l, bits_r}) {
    if (b < 1 || b > QuantizerSpec::kMaxBits) {
      throw DomainError("config: bit budgets must be in [1, " + std::to_string(QuantizerSpec::kMaxBits) + "]");
    }
  }
  check_positive_range(range_q, "config: range_q");
  check_positive_range(range_l, "config: range_l");
  check_positive_range(range_r, "config: range_r");
  if (outer_iterations < 1) throw DomainError("config: outer_iterations must be at least 1");
  if (inner_iterations < 0) throw DomainError("config: inner_iterations must be nonnegative");
  if (!(delta >= 0.0)) throw DomainError("config: delta must be nonnegative");
  if (!(saturation_threshold >= 0.0)) throw DomainError("config: saturation_threshold must be nonnegative");
  if (!(early_stop_tolerance >= 0.0)) throw DomainError("config: early_stop_tolerance must be nonnegative");
}

const char* to_string(UpdateOrder order) noexcept {
  return order == UpdateOrder::q_first ? "q_first" : "lr_first";
}

UpdateOrder parse_update_order(const std::string& text) {
  if (text == "q_first" || text == "Q_first") return UpdateOrder::q_first;
  if (text == "lr_first" || text == "LR_first") return UpdateOrder::lr_first;
  throw DomainError("unknown update order '" + text + "' (expected q_first or lr_first)");
}

RandomStream phase_stream(std::uint64_t seed, int t, Phase phase) {
  return RandomStream(seed).substream(static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(phase));
}

Matrix CalderaResult::reconstruction() const {
  Matrix W = Q + low_rank_product(L, R, Q.rows(), Q.cols());
  return rht ? rht_inverse(W, *rht) : W;
}

double decomposition_error(const Matrix& W, const Matrix& Q, const Matrix& L, const Matrix& R,
                           const HessianContext& ctx) {
  if (Q.rows() != W.rows() || Q.cols() != W.cols()) throw ShapeError("decomposition_error: Q/W mismatch");
  Matrix E = Q - W;
  if (L.cols() > 0) E.noalias() += L * R;
  return proxy_error(E, ctx);
}

HessianContext hessian_update(const HessianContext& ctx, const Matrix& L, const Matrix& R) {
  const Index d = ctx.dim();
  if (R.cols() != d || L.cols() != R.rows()) throw ShapeError("hessian_update: factor shapes do not match H");
  Eigen::MatrixXd Hcm = ctx.H;
  Eigen::LLT<Eigen::MatrixXd> llt(Hcm);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("hessian_update: H is not positive definite (Cholesky failed)", -1);
  }
  Matrix Mc = llt.matrixL();
  if (L.cols() == 0) return ctx;
  Matrix P = (L * R) * Mc;
  if (P.isZero(0.0)) return ctx;

  Svd f = svd(P);
  const Index r = numerical_rank(f.s);
  if (r == 0) return ctx;
  Matrix MV = Mc * f.V.leftCols(r);
  Matrix Ht = ctx.H - MV * MV.transpose();
  Ht = 0.5 * (Ht + Ht.transpose());
  return hessian_context(Ht, ctx.m, 0.0);
}

CalderaResult caldera_decompose(const Matrix& W, const HessianContext& ctx, const DecompositionConfig& cfg) {
  cfg.validate();
  if (W.cols() != ctx.dim()) {
    throw ShapeError("caldera: W has " + std::to_string(W.cols()) + " columns but H is " +
                     std::to_string(ctx.dim()) + " x " + std::to_string(ctx.dim()));
  }
  if (W.size() == 0) throw ShapeError("caldera: W is empty");
  if (!W.allFinite()) throw DomainError("caldera: non-finite W");
  if (cfg.rank > std::min(W.rows(), W.cols())) {
    throw DomainError("caldera: rank " + std::to_string(cfg.rank) + " exceeds min(n, d)");
  }
  const auto start = Clock::now();

  CalderaResult out;
  out.config = cfg;

  // Working coordinates: the caller's, or the padded Hadamard-rotated ones.
  std::unique_ptr<HessianContext> rotated;
  Matrix Wt;
  if (cfg.use_rht) {
    out.rht = make_rht(cfg.seed, W.rows(), W.cols());
    double pad = cfg.delta > 0.0 ? cfg.delta
                                 : (ctx.regularization > 0.0 ? ctx.regularization : default_regularization(ctx.H));
    Wt = rht_forward(W, *out.rht);
    rotated = std::make_unique<HessianContext>(
        hessian_context(rht_forward_hessian(ctx.H, *out.rht, pad), ctx.m, 0.0));
  }
  const Matrix& Wk = cfg.use_rht ? Wt : W;
  const HessianContext& base = cfg.use_rht ? *rotated : ctx;
  const Index n = Wk.rows(), d = Wk.cols(), k = cfg.rank;
  out.calibration_rows = base.m;
  out.lambda_max = base.lambda_max;

  Matrix Q = Matrix::Zero(n, d);
  Matrix L = Matrix::Zero(n, k);
  Matrix R = Matrix::Zero(k, d);
  std::unique_ptr<HessianContext> updated;
  bool first_ldlq = true;
  std::size_t backbone_sat = 0, left_sat = 0, right_sat = 0;

  auto run_ldlq = [&](int t) {
    const HessianContext* qctx = &base;
    if (cfg.use_hessian_update && k > 0 && !L.isZero(0.0) && !R.isZero(0.0)) {
      auto t0 = Clock::now();
      updated = std::make_unique<HessianContext>(hessian_update(base, L, R));
      qctx = updated.get();
      out.timings.hessian_update += seconds_since(t0);
    }
    auto t0 = Clock::now();
    Matrix target = Wk - low_rank_product(L, R, n, d);
    QuantizerSpec spec = cfg.range_q ? QuantizerSpec(cfg.bits_q, *cfg.range_q)
                                     : default_backbone_quantizer(target, cfg.bits_q);
    LdlqResult res = ldlq_quantize(target, *qctx, spec, phase_stream(cfg.seed, t, Phase::backbone));
    if (first_ldlq) {
      out.first_eta = res.eta;
      out.first_range_q = spec.range();
      out.ldl_diagonal = qctx->D;
      first_ldlq = false;
    }
    Q = std::move(res.Q);
    backbone_sat = res.saturation_count;
    out.saturation.backbone += res.saturation_count;
    out.timings.ldlq += seconds_since(t0);
  };

  auto run_lplr = [&](int t) {
    auto t0 = Clock::now();
    Matrix A = Wk - Q;
    analysis::FactorRanges ranges{1.0, 1.0};
    if (!cfg.range_l || !cfg.range_r) ranges = default_factor_ranges(A, k, base);
    QuantizerSpec spec_l(cfg.bits_l, cfg.range_l.value_or(ranges.left));
    QuantizerSpec spec_r(cfg.bits_r, cfg.range_r.value_or(ranges.right));
    LplrOptions opts;
    opts.saturation_threshold = cfg.saturation_threshold;
    opts.strict_fallback = cfg.strict_fallback;
    opts.adaptive_ranges = cfg.adaptive_factor_ranges;
    LplrResult lp = lplr_factorize(A, k, base, spec_l, spec_r, cfg.inner_iterations,
                                   phase_stream(cfg.seed, t, Phase::factors), opts);
    L = std::move(lp.L);
    R = std::move(lp.R);
    left_sat = lp.saturation.left;
    right_sat = lp.saturation.right;
    out.saturation.left += lp.total_saturation.left;
    out.saturation.right += lp.total_saturation.right;
    out.saturation.fallback_events += lp.fallback_used ? 1 : 0;
    out.saturation.gram_regularizations += lp.gram_regularizations;
    out.inner_best_traces.push_back(std::move(lp.best_trace));
    out.timings.lplr += seconds_since(t0);
  };

  const int outer = k == 0 ? 1 : cfg.outer_iterations;
  for (int t = 1; t <= outer; ++t) {
    if (k == 0) {
      run_ldlq(t);
    } else if (cfg.update_order == UpdateOrder::q_first) {
      run_ldlq(t);
      run_lplr(t);
    } else {
      run_lplr(t);
      run_ldlq(t);
    }
    double err = decomposition_error(Wk, Q, L, R, base);
    out.error_trace.push_back(err);
    const double previous = out.best_trace.empty() ? err : out.best_trace.back();
    if (t == 1 || err < out.best_error) {
      out.best_error = err;
      out.best_iteration = static_cast<std::size_t>(t);
      out.Q = Q;
      out.L = L;
      out.R = R;
      out.saturation.best_backbone = backbone_sat;
      out.saturation.best_left = left_sat;
      out.saturation.best_right = right_sat;
    }
    out.best_trace.push_back(out.best_error);
    if (cfg.early_stop_tolerance > 0.0 && t > 1 && previous > 0.0 &&
        (previous - out.best_error) / previous < cfg.early_stop_tolerance) {
      break;
    }
  }
  out.timings.total = seconds_since(start);
  return out;
}

}  // namespace caldera
