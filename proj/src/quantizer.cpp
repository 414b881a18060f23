#include "caldera/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caldera/errors.hpp"

namespace caldera {

QuantizerSpec::QuantizerSpec(int bits, double range) : bits_(bits), range_(range) {
  if (bits < 1 || bits > kMaxBits) {
    throw DomainError("quantizer bits must be in [1, " + std::to_string(kMaxBits) +
                      "], got " + std::to_string(bits));
  }
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw DomainError("quantizer range must be positive and finite");
  }
  delta_ = 2.0 * range / static_cast<double>(levels() - 1);
}

double QuantizerSpec::level(std::uint64_t j) const noexcept {
  if (j + 1 >= levels()) return range_;
  return -range_ + static_cast<double>(j) * delta_;
}

std::vector<double> QuantizerSpec::codebook() const {
  std::vector<double> out(levels());
  for (std::uint64_t j = 0; j < out.size(); ++j) out[j] = level(j);
  return out;
}

bool QuantizerSpec::contains(double v) const noexcept {
  if (!std::isfinite(v) || v < -range_ || v > range_) return false;
  double t = std::round((v + range_) / delta_);
  if (t < 0.0) return false;
  auto j = static_cast<std::uint64_t>(t);
  for (std::uint64_t c : {j == 0 ? j : j - 1, j, j + 1}) {
    if (c < levels() && level(c) == v) return true;
  }
  return false;
}

QuantizerSpec build_quantizer(int bits, double range) { return QuantizerSpec(bits, range); }

QuantizeOutcome quantize_scalar(const QuantizerSpec& spec, double x, double u) {
  if (!std::isfinite(x)) throw DomainError("cannot quantize a non-finite value");
  const double R = spec.range();
  if (x > R) return {R, true};
  if (x < -R) return {-R, true};

  const std::uint64_t top = spec.levels() - 1;
  double t = std::floor((x + R) / spec.resolution());
  auto j = static_cast<std::uint64_t>(std::clamp(t, 0.0, static_cast<double>(top)));
  // The division can land one cell off; walk to the cell with level(j) <= x < level(j+1).
  while (j > 0 && x < spec.level(j)) --j;
  while (j < top && x >= spec.level(j + 1)) ++j;
  if (j == top) return {R, false};

  const double lo = spec.level(j);
  double r = std::clamp((x - lo) / spec.resolution(), 0.0, 1.0);
  return {u < r ? spec.level(j + 1) : lo, false};
}

QuantizeOutcome quantize_scalar(const QuantizerSpec& spec, double x, RandomStream& rng) {
  return quantize_scalar(spec, x, rng.next_uniform());
}

QuantizedMatrix quantize_matrix(const QuantizerSpec& spec, const Matrix& A, const RandomStream& rng) {
  if (!A.allFinite()) throw DomainError("cannot quantize a matrix with non-finite entries");
  QuantizedMatrix out;
  out.values.resize(A.rows(), A.cols());
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      auto q = quantize_scalar(spec, A(i, j), rng.uniform(static_cast<std::uint64_t>(i),
                                                          static_cast<std::uint64_t>(j)));
      out.values(i, j) = q.value;
      out.saturation_count += q.saturated ? 1 : 0;
    }
  }
  return out;
}

}  // namespace caldera
