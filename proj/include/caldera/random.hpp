#pragma once

#include <cstdint>

namespace caldera {

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based random stream.
///
/// Every draw is a pure function of (key, row, col), so a matrix can be
/// filled in any order or in parallel and still produce the same values.
/// The sequential `next_*` methods walk a private counter on a reserved row.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept;

  // Independent child stream; children with different tags never overlap.
  RandomStream substream(std::uint64_t tag) const noexcept;
  RandomStream substream(std::uint64_t a, std::uint64_t b) const noexcept;

  std::uint64_t bits(std::uint64_t row, std::uint64_t col) const noexcept;
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t row, std::uint64_t col) const noexcept;
  // Standard normal via Box-Muller on two uniforms of the same cell.
  double normal(std::uint64_t row, std::uint64_t col) const noexcept;

  double next_uniform() noexcept;
  double next_normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace caldera
