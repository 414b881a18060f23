#include <random>

#include "caldera/errors.hpp"
#include "caldera/hessian.hpp"
#include "caldera/rht.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace caldera;

TEST_CASE("fwht against the explicit Sylvester matrix") {
  const Index n = 8;
  Matrix Had(1, 1);
  Had << 1.0;
  while (Had.rows() < n) {
    Matrix next(2 * Had.rows(), 2 * Had.rows());
    next << Had, Had, Had, -Had;
    Had = next;
  }
  std::mt19937_64 gen(1);
  Matrix v = oracle::gaussian(n, 1, gen);
  Vector ref = Had * v.col(0);
  std::vector<double> buf(v.data(), v.data() + n);
  fwht(buf);
  for (Index i = 0; i < n; ++i) CHECK(buf[i] == doctest::Approx(ref(i)).epsilon(1e-13));
  std::vector<double> bad(6, 1.0);
  CHECK_THROWS_AS(fwht(bad), ShapeError);
}

TEST_CASE("context shapes and signs") {
  auto ctx = make_rht(3, 5, 12);
  CHECK(ctx.padded_rows == 8);
  CHECK(ctx.padded_cols == 16);
  CHECK(ctx.left_signs.size() == 8);
  CHECK(ctx.right_signs.size() == 16);
  for (double s : ctx.left_signs) CHECK((s == 1.0 || s == -1.0));
  for (double s : ctx.right_signs) CHECK((s == 1.0 || s == -1.0));
  CHECK(next_power_of_two(1) == 1);
  CHECK(next_power_of_two(64) == 64);
  CHECK(next_power_of_two(65) == 128);
}

TEST_CASE("inverse undoes forward, padded and unpadded") {
  std::mt19937_64 gen(2);
  for (auto [n, d] : {std::pair<Index, Index>{8, 16}, {5, 12}, {33, 7}}) {
    Matrix W = oracle::gaussian(n, d, gen);
    auto ctx = make_rht(9, n, d);
    Matrix back = rht_inverse(rht_forward(W, ctx), ctx);
    CHECK((back - W).norm() <= 1e-10 * W.norm());
  }
}

TEST_CASE("isometry on power-of-two shapes") {
  std::mt19937_64 gen(3);
  Matrix W = oracle::gaussian(16, 32, gen);
  auto ctx = make_rht(4, 16, 32);
  CHECK(rht_forward(W, ctx).norm() == doctest::Approx(W.norm()).epsilon(1e-13));
}

TEST_CASE("proxy loss is invariant under the transform") {
  std::mt19937_64 gen(4);
  const Index n = 32, d = 64, m = 80;
  Matrix X = oracle::gaussian(m, d, gen);
  Matrix A = oracle::gaussian(n, d, gen);
  auto ctx = compute_hessian(X, 1e-3);
  auto r = make_rht(5, n, d);
  Matrix At = rht_forward(A, r);
  Matrix Ht = rht_forward_hessian(ctx.H, r, 1e-3);
  double direct = proxy_error(A, ctx.H, double(m));
  double rotated = proxy_error(At, Ht, double(m));
  CHECK(rotated == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("padded Hessian keeps the regularized padding block") {
  std::mt19937_64 gen(5);
  Matrix X = oracle::gaussian(10, 6, gen);
  auto ctx = compute_hessian(X, 1e-4);
  auto r = make_rht(6, 3, 6);
  Matrix Ht = rht_forward_hessian(ctx.H, r, 1e-4);
  REQUIRE(Ht.rows() == 8);
  // Spectrum is that of blockdiag(H, 1e-4 I).
  Vector ev = symmetric_eigen(Ht).values;
  Vector ref(8);
  ref << symmetric_eigen(ctx.H).values, 1e-4, 1e-4;
  std::sort(ref.data(), ref.data() + 8);
  CHECK((ev - ref).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(rht_forward(Matrix::Zero(4, 6), r), ShapeError);
}
