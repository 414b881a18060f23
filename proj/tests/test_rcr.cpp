#include <random>

#include "caldera/errors.hpp"
#include "caldera/linalg.hpp"
#include "caldera/rcr.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace caldera;

namespace {

Index numeric_rank(const Matrix& Z) {
  auto s = oracle::singular_values(Z);
  Index r = 0;
  while (r < s.size() && s(r) > 1e-8 * s(0)) ++r;
  return r;
}

}  // namespace

TEST_CASE("identity X reduces to the truncated SVD") {
  std::mt19937_64 gen(1);
  Matrix Y = oracle::gaussian(7, 5, gen);
  auto sol = solve_rcr(Matrix::Identity(7, 7), Y, 2);
  double expect = oracle::tail_energy(oracle::singular_values(Y), 2);
  CHECK(sol.optimal_value == doctest::Approx(expect).epsilon(1e-10));
  CHECK(rcr_objective(Matrix::Identity(7, 7), sol.Z_star, Y) == doctest::Approx(expect).epsilon(1e-10));
  CHECK(sol.irreducible == doctest::Approx(0.0));
}

TEST_CASE("low-rank Y is fit exactly in the wide branch") {
  std::mt19937_64 gen(2);
  Matrix Y = oracle::gaussian(6, 2, gen) * oracle::gaussian(2, 9, gen);
  Matrix X = oracle::gaussian(6, 10, gen);
  auto sol = solve_rcr(X, Y, 3);
  CHECK(sol.branch == RcrBranch::wide);
  CHECK(sol.optimal_value <= 1e-8 * Y.squaredNorm());
  CHECK(rcr_objective(X, sol.Z_star, Y) <= 1e-8 * Y.squaredNorm());
}

TEST_CASE("wide instance against an independent SVD of Y") {
  std::mt19937_64 gen(3);
  Matrix X = oracle::gaussian(8, 12, gen);
  Matrix Y = oracle::gaussian(8, 6, gen);
  auto sol = solve_rcr(X, Y, 3);
  double expect = oracle::tail_energy(oracle::singular_values(Y), 3);
  CHECK(rcr_objective(X, sol.Z_star, Y) == doctest::Approx(expect).epsilon(1e-6));
  CHECK(sol.optimal_value == doctest::Approx(expect).epsilon(1e-6));
  CHECK(numeric_rank(sol.Z_star) <= 3);
  CHECK(sol.Z_star.rows() == 12);
  CHECK(sol.Z_star.cols() == 6);
  CHECK((sol.left_factor * sol.right_factor - sol.Z_star).norm() <= 1e-12 * sol.Z_star.norm());
}

TEST_CASE("tall instance carries the irreducible term") {
  std::mt19937_64 gen(4);
  Matrix X = oracle::gaussian(15, 6, gen);
  Matrix Y = oracle::gaussian(15, 5, gen);
  auto sol = solve_rcr(X, Y, 2);
  CHECK(sol.branch == RcrBranch::tall);
  CHECK(sol.irreducible > 0.0);
  double expect = oracle::rcr_optimum(X, Y, 2);
  CHECK(sol.optimal_value == doctest::Approx(expect).epsilon(1e-8));
  CHECK(rcr_objective(X, sol.Z_star, Y) == doctest::Approx(expect).epsilon(1e-8));
  // Irreducible part is the energy of Y outside range(X).
  Eigen::MatrixXd Xc = X;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xc);
  Eigen::MatrixXd Q = qr.householderQ();
  double outside = (Q.rightCols(9).transpose() * Y).squaredNorm();
  CHECK(sol.irreducible == doctest::Approx(outside).epsilon(1e-10));
}

TEST_CASE("branches agree on square X") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 5; ++t) {
    Matrix X = oracle::gaussian(7, 7, gen);
    Matrix Y = oracle::gaussian(7, 4, gen);
    auto a = solve_rcr_wide(X, Y, 2);
    auto b = solve_rcr_tall(X, Y, 2);
    CHECK(oracle::relative(a.optimal_value, b.optimal_value) <= 1e-8);
  }
}

TEST_CASE("rank-deficient X uses only the reachable directions") {
  std::mt19937_64 gen(6);
  Matrix X = oracle::gaussian(6, 2, gen) * oracle::gaussian(2, 9, gen);  // rank 2, wide
  Matrix Y = oracle::gaussian(6, 5, gen);
  auto sol = solve_rcr(X, Y, 3);
  CHECK(sol.rank_x == 2);
  double expect = oracle::rcr_optimum(X, Y, 3);
  CHECK(sol.optimal_value == doctest::Approx(expect).epsilon(1e-8));
  CHECK(rcr_objective(X, sol.Z_star, Y) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("no random rank-k perturbation improves the optimum") {
  std::mt19937_64 gen(7);
  Matrix X = oracle::gaussian(9, 11, gen);
  Matrix Y = oracle::gaussian(9, 7, gen);
  const Index k = 3;
  auto sol = solve_rcr(X, Y, k);
  const double scale = 1e-3 * sol.Z_star.norm();
  for (int t = 0; t < 50; ++t) {
    Matrix P = sol.Z_star + scale * oracle::gaussian(11, k, gen) * oracle::gaussian(k, 7, gen) / std::sqrt(double(k * 7 * 11));
    Svd f = svd(P);
    Matrix Pk = f.U.leftCols(k) * f.s.head(k).asDiagonal() * f.V.leftCols(k).transpose();
    CHECK(rcr_objective(X, Pk, Y) >= sol.optimal_value - 1e-9);
  }
}

TEST_CASE("argument validation") {
  Matrix X = Matrix::Identity(4, 4);
  Matrix Y = Matrix::Ones(4, 3);
  CHECK_THROWS_AS(solve_rcr(X, Y, 0), DomainError);
  CHECK_THROWS_AS(solve_rcr(X, Y, 4), DomainError);
  CHECK_THROWS_AS(solve_rcr(X, Matrix::Ones(5, 3), 1), ShapeError);
  CHECK_THROWS_AS(solve_rcr_wide(Matrix::Ones(5, 3), Matrix::Ones(5, 2), 1), ShapeError);
  CHECK_THROWS_AS(solve_rcr_tall(Matrix::Ones(3, 5), Matrix::Ones(3, 2), 1), ShapeError);
  Y(0, 0) = NAN;
  CHECK_THROWS_AS(solve_rcr(X, Y, 1), DomainError);
}

TEST_CASE("positive definite shortcut with H = I") {
  std::mt19937_64 gen(8);
  Matrix A = oracle::gaussian(6, 10, gen);
  auto sol = solve_rcr_pd(A, Matrix::Identity(10, 10), 3);
  CHECK(sol.optimal_value == doctest::Approx(oracle::tail_energy(oracle::singular_values(A), 3)).epsilon(1e-10));
  CHECK((A - sol.Z_star).squaredNorm() == doctest::Approx(sol.optimal_value).epsilon(1e-10));
}

TEST_CASE("positive definite shortcut fits low-rank A exactly") {
  std::mt19937_64 gen(9);
  Matrix A = oracle::gaussian(6, 2, gen) * oracle::gaussian(2, 10, gen);
  Matrix H = oracle::random_pd(10, gen);
  auto sol = solve_rcr_pd(A, H, 2);
  CHECK(sol.optimal_value <= 1e-10 * A.squaredNorm());
}

TEST_CASE("positive definite shortcut matches the general solver on H^{1/2}") {
  std::mt19937_64 gen(10);
  const Index m = 14, d = 10;
  Matrix A = oracle::gaussian(6, d, gen);
  Matrix X = oracle::gaussian(m, d, gen);
  Matrix H = X.transpose() * X / double(m);
  H.diagonal().array() += 1e-3;
  Eigen::MatrixXd Hc = H;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hc);
  Matrix Hhalf = es.operatorSqrt();
  auto pd = solve_rcr_pd(A, H, 3);
  auto gen_sol = solve_rcr(Hhalf, Matrix(Hhalf * A.transpose()), 3);
  CHECK(oracle::relative(pd.optimal_value, gen_sol.optimal_value) <= 1e-6);
  CHECK((pd.Z_star - gen_sol.Z_star.transpose()).norm() <= 1e-6 * pd.Z_star.norm());
  CHECK_THROWS_AS(solve_rcr_pd(A, Matrix(-H), 2), DomainError);
}
