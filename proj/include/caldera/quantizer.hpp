#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "caldera/random.hpp"
#include "caldera/types.hpp"

namespace caldera {

/// Uniform scalar codebook on [-R, R] with 2^B points.
///
/// Levels are computed on demand: at B = 24 the codebook has ~16.7M points and
/// is only materialized when `codebook()` is called. The top level is pinned to
/// exactly +R so both endpoints are representable without rounding.
class QuantizerSpec {
 public:
  static constexpr int kMaxBits = 24;

  QuantizerSpec(int bits, double range);

  int bits() const noexcept { return bits_; }
  double range() const noexcept { return range_; }
  double resolution() const noexcept { return delta_; }
  std::uint64_t levels() const noexcept { return std::uint64_t{1} << bits_; }

  // Zero-based: level(0) = -R, level(levels() - 1) = +R.
  double level(std::uint64_t j) const noexcept;
  std::vector<double> codebook() const;
  // Exact membership test.
  bool contains(double v) const noexcept;

 private:
  int bits_;
  double range_;
  double delta_;
};

QuantizerSpec build_quantizer(int bits, double range);

struct QuantizeOutcome {
  double value;
  bool saturated;
};

// u is the dither draw in [0, 1).
QuantizeOutcome quantize_scalar(const QuantizerSpec& spec, double x, double u);
QuantizeOutcome quantize_scalar(const QuantizerSpec& spec, double x, RandomStream& rng);

struct QuantizedMatrix {
  Matrix values;
  std::size_t saturation_count = 0;
};

// Entry (i, j) uses the draw rng.uniform(i, j).
QuantizedMatrix quantize_matrix(const QuantizerSpec& spec, const Matrix& A, const RandomStream& rng);

}  // namespace caldera
