#include "caldera/synth.hpp"

#include <algorithm>
#include <cmath>

#include "caldera/errors.hpp"

namespace caldera {

const char* to_string(SpectrumKind kind) noexcept {
  switch (kind) {
    case SpectrumKind::decaying_power: return "decaying_power";
    case SpectrumKind::decaying_exp: return "decaying_exp";
    case SpectrumKind::lowrank_plus_noise: return "lowrank_plus_noise";
  }
  return "unknown";
}

SpectrumKind parse_spectrum_kind(const std::string& text) {
  if (text == "decaying_power") return SpectrumKind::decaying_power;
  if (text == "decaying_exp") return SpectrumKind::decaying_exp;
  if (text == "lowrank_plus_noise") return SpectrumKind::lowrank_plus_noise;
  throw DomainError("unknown spectrum kind '" + text + "'");
}

Matrix gaussian_matrix(Index rows, Index cols, const RandomStream& rng) {
  Matrix G(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) G(i, j) = rng.normal(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
  }
  return G;
}

Matrix haar_orthogonal(Index n, const RandomStream& rng) {
  if (n < 1) throw DomainError("haar_orthogonal: n must be positive");
  Eigen::MatrixXd G = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd Rm = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (Rm(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

Vector synth_spectrum(SpectrumKind kind, Index count, const SynthParams& params) {
  Vector s = Vector::Zero(count);
  switch (kind) {
    case SpectrumKind::decaying_power:
      if (!(params.power >= 0.0)) throw DomainError("synth: power must be nonnegative");
      for (Index i = 0; i < count; ++i) s(i) = std::pow(static_cast<double>(i + 1), -params.power);
      break;
    case SpectrumKind::decaying_exp:
      if (!(params.rho > 0.0 && params.rho < 1.0)) throw DomainError("synth: rho must be in (0, 1)");
      for (Index i = 0; i < count; ++i) s(i) = std::pow(params.rho, static_cast<double>(i + 1));
      break;
    case SpectrumKind::lowrank_plus_noise:
      if (params.rank < 0 || params.rank > count) throw DomainError("synth: rank must be in [0, min(n, d)]");
      if (!(params.noise >= 0.0)) throw DomainError("synth: noise must be nonnegative");
      for (Index i = 0; i < params.rank; ++i) s(i) = 1.0 / static_cast<double>(i + 1);
      break;
  }
  return s;
}

Matrix synthesize_matrix(SpectrumKind kind, Index n, Index d, const SynthParams& params, std::uint64_t seed) {
  if (n < 1 || d < 1) throw DomainError("synth: dimensions must be positive");
  const Index p = std::min(n, d);
  Vector s = synth_spectrum(kind, p, params);
  RandomStream base(seed, 0x53594E);
  Matrix U = haar_orthogonal(n, base.substream(0));
  Matrix V = haar_orthogonal(d, base.substream(1));
  Matrix W = U.leftCols(p) * s.asDiagonal() * V.leftCols(p).transpose();
  if (kind == SpectrumKind::lowrank_plus_noise && params.noise > 0.0) {
    W += params.noise * gaussian_matrix(n, d, base.substream(2));
  }
  return W;
}

}  // namespace caldera
