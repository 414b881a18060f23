#pragma once

#include <cstddef>

#include "caldera/hessian.hpp"
#include "caldera/quantizer.hpp"
#include "caldera/random.hpp"
#include "caldera/types.hpp"

namespace caldera {

struct LdlqResult {
  Matrix Q;
  Matrix eta;  // quantizer output minus its feedback-adjusted input, per column
  std::size_t saturation_count = 0;
  double proxy_error = 0.0;  // m * trace((Q - W) H (Q - W)^T)
};

// Range max|W| (1 if W is identically zero).
QuantizerSpec default_backbone_quantizer(const Matrix& W, int bits);

/// Column-sequential quantization with linear feedback from ctx.M.
/// Entry (i, j) draws its dither from rng.uniform(i, j), so with M = 0 the
/// result is identical to quantize_matrix(spec, W, rng).
LdlqResult ldlq_quantize(const Matrix& W, const HessianContext& ctx, const QuantizerSpec& spec,
                         const RandomStream& rng);

// ||(Q - W)(M + I) - eta||_F / ||eta||_F (the absolute residual when eta = 0).
double verify_error_identity(const LdlqResult& result, const Matrix& W, const HessianContext& ctx);

}  // namespace caldera
