#pragma once

#include <cstdint>
#include <string>

#include "caldera/random.hpp"
#include "caldera/types.hpp"

namespace caldera {

enum class SpectrumKind { decaying_power, decaying_exp, lowrank_plus_noise };

const char* to_string(SpectrumKind kind) noexcept;
SpectrumKind parse_spectrum_kind(const std::string& text);

struct SynthParams {
  double power = 1.0;  // sigma_i = i^-power
  double rho = 0.9;    // sigma_i = rho^i
  Index rank = 8;      // lowrank_plus_noise: sigma_i = 1/i for i <= rank
  double noise = 0.0;  // lowrank_plus_noise: entrywise N(0, noise^2) added
};

Matrix gaussian_matrix(Index rows, Index cols, const RandomStream& rng);

// Haar-distributed orthogonal matrix (QR of a Gaussian with the R-diagonal sign fixed).
Matrix haar_orthogonal(Index n, const RandomStream& rng);

// min(n, d) singular values for the kind, before any noise.
Vector synth_spectrum(SpectrumKind kind, Index count, const SynthParams& params);

// U diag(sigma) V^T with Haar U, V; deterministic in seed.
Matrix synthesize_matrix(SpectrumKind kind, Index n, Index d, const SynthParams& params, std::uint64_t seed);

}  // namespace caldera
