#include <cmath>
#include <limits>
#include <set>

#include "caldera/errors.hpp"
#include "caldera/quantizer.hpp"
#include "doctest.h"

using namespace caldera;

TEST_CASE("codebook for B=2, R=3") {
  auto q = build_quantizer(2, 3.0);
  CHECK(q.resolution() == 2.0);
  auto cb = q.codebook();
  REQUIRE(cb.size() == 4);
  CHECK(cb[0] == -3.0);
  CHECK(cb[1] == -1.0);
  CHECK(cb[2] == 1.0);
  CHECK(cb[3] == 3.0);
}

TEST_CASE("two-point codebook") {
  auto q = build_quantizer(1, 1.0);
  CHECK(q.resolution() == 2.0);
  auto cb = q.codebook();
  REQUIRE(cb.size() == 2);
  CHECK(cb[0] == -1.0);
  CHECK(cb[1] == 1.0);
}

TEST_CASE("codebook for B=4, R=2") {
  auto q = build_quantizer(4, 2.0);
  CHECK(q.resolution() == doctest::Approx(4.0 / 15.0).epsilon(1e-15));
  auto cb = q.codebook();
  CHECK(cb.size() == 16);
  CHECK(cb.front() == -2.0);
  CHECK(cb.back() == 2.0);
  for (std::size_t j = 1; j < cb.size(); ++j) {
    CHECK(std::abs((cb[j] - cb[j - 1]) - q.resolution()) <= 4 * std::numeric_limits<double>::epsilon() * 2.0);
  }
}

TEST_CASE("parameter domain errors") {
  CHECK_THROWS_AS(build_quantizer(0, 1.0), DomainError);
  CHECK_THROWS_AS(build_quantizer(25, 1.0), DomainError);
  CHECK_THROWS_AS(build_quantizer(2, 0.0), DomainError);
  CHECK_THROWS_AS(build_quantizer(2, -1.0), DomainError);
  auto q = build_quantizer(2, 1.0);
  CHECK_THROWS_AS(quantize_scalar(q, std::nan(""), 0.5), DomainError);
  CHECK_THROWS_AS(quantize_scalar(q, INFINITY, 0.5), DomainError);
}

TEST_CASE("24-bit codebook endpoints without materializing") {
  QuantizerSpec q(24, 1.5);
  CHECK(q.levels() == (1u << 24));
  CHECK(q.level(0) == -1.5);
  CHECK(q.level(q.levels() - 1) == 1.5);
  CHECK(q.contains(q.level(12345)));
}

TEST_CASE("grid points are fixed points") {
  auto q = build_quantizer(3, 2.0);
  RandomStream rng(7);
  for (double v : q.codebook()) {
    for (int t = 0; t < 200; ++t) {
      auto out = quantize_scalar(q, v, rng);
      CHECK(out.value == v);
      CHECK_FALSE(out.saturated);
    }
  }
}

TEST_CASE("midpoint splits evenly") {
  auto q = build_quantizer(2, 1.0);
  const double mid = 0.5 * (q.level(1) + q.level(2));
  RandomStream rng(11);
  int up = 0;
  const int N = 100000;
  for (int t = 0; t < N; ++t) up += quantize_scalar(q, mid, rng).value == q.level(2) ? 1 : 0;
  CHECK(std::abs(up / double(N) - 0.5) <= 0.01);
}

TEST_CASE("unbiased with bounded variance at x = 0.3") {
  auto q = build_quantizer(2, 1.0);
  RandomStream rng(3);
  const int N = 100000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < N; ++t) {
    double v = quantize_scalar(q, 0.3, rng).value;
    s += v;
    s2 += v * v;
  }
  double mean = s / N;
  double var = s2 / N - mean * mean;
  const double D = q.resolution();
  CHECK(std::abs(mean - 0.3) <= 4 * (D / 2) / std::sqrt(double(N)));
  CHECK(var <= D * D / 4);
}

TEST_CASE("saturation clamps to the endpoints") {
  auto q = build_quantizer(3, 1.0);
  auto hi = quantize_scalar(q, 1.0001, 0.0);
  CHECK(hi.value == 1.0);
  CHECK(hi.saturated);
  auto lo = quantize_scalar(q, -5.0, 0.99);
  CHECK(lo.value == -1.0);
  CHECK(lo.saturated);
  auto edge = quantize_scalar(q, 1.0, 0.999999);
  CHECK(edge.value == 1.0);
  CHECK_FALSE(edge.saturated);
}

TEST_CASE("matrix of codebook points is unchanged") {
  auto q = build_quantizer(2, 3.0);
  Matrix A(2, 3);
  A << -3, -1, 1, 3, 1, -1;
  auto out = quantize_matrix(q, A, RandomStream(5));
  CHECK(out.values == A);
  CHECK(out.saturation_count == 0);
}

TEST_CASE("zero matrix without zero in the codebook averages to zero") {
  auto q = build_quantizer(2, 3.0);
  Matrix A = Matrix::Zero(200, 200);
  auto out = quantize_matrix(q, A, RandomStream(8));
  std::set<double> seen(out.values.data(), out.values.data() + out.values.size());
  CHECK(seen == std::set<double>{-1.0, 1.0});
  // Each entry is +-1 with probability 1/2: standard error 1/200.
  CHECK(std::abs(out.values.mean()) <= 4.0 / 200.0);
}

TEST_CASE("one out-of-range entry is counted") {
  auto q = build_quantizer(4, 1.0);
  Matrix A = Matrix::Constant(3, 3, 0.25);
  A(1, 2) = 2.0;
  auto out = quantize_matrix(q, A, RandomStream(1));
  CHECK(out.saturation_count == 1);
  CHECK(out.values(1, 2) == 1.0);
}

TEST_CASE("matrix quantization is deterministic and closed") {
  auto q = build_quantizer(3, 1.0);
  Matrix A = Matrix::Random(17, 9);
  auto a = quantize_matrix(q, A, RandomStream(42));
  auto b = quantize_matrix(q, A, RandomStream(42));
  auto c = quantize_matrix(q, A, RandomStream(43));
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  for (Index i = 0; i < A.size(); ++i) CHECK(q.contains(a.values.data()[i]));
  CHECK_THROWS_AS(quantize_matrix(q, Matrix::Constant(1, 1, NAN), RandomStream(1)), DomainError);
}

TEST_CASE("random stream draws are order independent") {
  RandomStream s(9);
  double a = s.uniform(3, 4);
  double b = s.uniform(100, 2);
  CHECK(RandomStream(9).uniform(100, 2) == b);
  CHECK(RandomStream(9).uniform(3, 4) == a);
  CHECK(s.substream(1).key() != s.substream(2).key());
  CHECK(s.substream(1, 2).key() != s.substream(2, 1).key());
}
