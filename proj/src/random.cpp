#include "caldera/random.hpp"

#include <cmath>
#include <numbers>

namespace caldera {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kRowMul = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kColMul = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t kSequentialRow = ~0ULL;
}  // namespace

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed) ^ (stream * kGolden + 0x632BE59BD9B4E019ULL))) {}

RandomStream RandomStream::substream(std::uint64_t tag) const noexcept {
  RandomStream child;
  child.key_ = mix64(key_ ^ mix64(tag * kRowMul + 0x8CB92BA72F3D8DD7ULL));
  return child;
}

RandomStream RandomStream::substream(std::uint64_t a, std::uint64_t b) const noexcept {
  return substream(a).substream(b);
}

std::uint64_t RandomStream::bits(std::uint64_t row, std::uint64_t col) const noexcept {
  std::uint64_t h = mix64(key_ ^ (row * kRowMul));
  return mix64(h ^ (col * kColMul + 0x165667B19E3779F9ULL));
}

double RandomStream::uniform(std::uint64_t row, std::uint64_t col) const noexcept {
  return static_cast<double>(bits(row, col) >> 11) * 0x1.0p-53;
}

double RandomStream::normal(std::uint64_t row, std::uint64_t col) const noexcept {
  // Even and odd column slots supply the two uniforms.
  double u1 = uniform(row, 2 * col);
  double u2 = uniform(row, 2 * col + 1);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::next_uniform() noexcept { return uniform(kSequentialRow, counter_++); }

double RandomStream::next_normal() noexcept { return normal(kSequentialRow - 1, counter_++); }

}  // namespace caldera
