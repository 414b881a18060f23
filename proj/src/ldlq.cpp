#include "caldera/ldlq.hpp"

#include <string>

#include "caldera/errors.hpp"

namespace caldera {

QuantizerSpec default_backbone_quantizer(const Matrix& W, int bits) {
  double r = W.size() ? W.cwiseAbs().maxCoeff() : 0.0;
  return QuantizerSpec(bits, r > 0.0 ? r : 1.0);
}

LdlqResult ldlq_quantize(const Matrix& W, const HessianContext& ctx, const QuantizerSpec& spec,
                         const RandomStream& rng) {
  if (W.cols() != ctx.dim()) throw ShapeError("ldlq: W has " + std::to_string(W.cols()) +
                                              " columns but H is " + std::to_string(ctx.dim()) + " x " +
                                              std::to_string(ctx.dim()));
  if (!W.allFinite()) throw DomainError("ldlq: non-finite W");
  const Index n = W.rows(), d = W.cols();
  LdlqResult out;
  out.Q.resize(n, d);
  out.eta.resize(n, d);
  // Column-major scratch so the feedback product reads contiguous residual columns.
  Eigen::MatrixXd residual = Eigen::MatrixXd::Zero(n, d);  // W - Q, filled column by column
  Eigen::VectorXd input(n);

  for (Index k = 0; k < d; ++k) {
    input = W.col(k);
    if (k > 0) input.noalias() += residual.leftCols(k) * ctx.M.col(k).head(k);
    for (Index i = 0; i < n; ++i) {
      auto q = quantize_scalar(spec, input(i),
                               rng.uniform(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k)));
      out.Q(i, k) = q.value;
      out.eta(i, k) = q.value - input(i);
      residual(i, k) = W(i, k) - q.value;
      out.saturation_count += q.saturated ? 1 : 0;
    }
  }
  out.proxy_error = proxy_error(Matrix(out.Q - W), ctx);
  return out;
}

double verify_error_identity(const LdlqResult& result, const Matrix& W, const HessianContext& ctx) {
  if (result.Q.rows() != W.rows() || result.Q.cols() != W.cols() || result.eta.rows() != W.rows() ||
      result.eta.cols() != W.cols() || ctx.dim() != W.cols()) {
    throw ShapeError("verify_error_identity: shape mismatch");
  }
  Matrix E = result.Q - W;
  Matrix lhs = E + E * ctx.M;
  double num = (lhs - result.eta).norm();
  double den = result.eta.norm();
  return den > 0.0 ? num / den : num;
}

}  // namespace caldera
