#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "proxlr/errors.hpp"
#include "proxlr/spectral_set.hpp"

using namespace proxlr;

namespace {

Matrix diag(std::initializer_list<double> d, Eigen::Index rows, Eigen::Index cols) {
  Matrix m = Matrix::Zero(rows, cols);
  Eigen::Index k = 0;
  for (double v : d) {
    m(k, k) = v;
    ++k;
  }
  return m;
}

}  // namespace

TEST_CASE("membership examples") {
  const SpectralSet s(2, 2, 1, 1.0);
  CHECK(contains(s, diag({2, 0}, 2, 2)));
  CHECK_FALSE(contains(s, diag({0.5, 0}, 2, 2)));
  CHECK_FALSE(contains(s, Matrix::Zero(2, 2)));
  CHECK_FALSE(contains(s, diag({2, 1.5}, 2, 2)));  // rank 2 > r
  CHECK(contains(s, diag({1.0 - 1e-12, 0}, 2, 2)));
  CHECK_FALSE(contains(s, diag({1.0 - 1e-6, 0}, 2, 2)));
  CHECK(contains(s, diag({1.0 - 1e-6, 0}, 2, 2), 1e-5));
  CHECK_THROWS_AS(contains(s, Matrix::Zero(3, 2)), DimensionError);
}

TEST_CASE("set parameters") {
  CHECK_THROWS_AS(SpectralSet(3, 4, 0, 1.0), ParameterError);
  CHECK_THROWS_AS(SpectralSet(3, 4, 4, 1.0), ParameterError);
  CHECK_THROWS_AS(SpectralSet(3, 4, 2, 0.0), ParameterError);
  CHECK_THROWS_AS(SpectralSet(3, 4, 2, -1.0), ParameterError);
  CHECK_NOTHROW(SpectralSet(3, 4, 3, 0.1));
}

TEST_CASE("scalar spectral map") {
  CHECK(spectral_floor_map(3.0, 1.0) == 3.0);
  CHECK(spectral_floor_map(1.0, 1.0) == 1.0);
  CHECK(spectral_floor_map(0.7, 1.0) == 1.0);
  CHECK(spectral_floor_map(0.5, 1.0) == 1.0);  // tie goes to sigma
  CHECK(spectral_floor_map(0.49, 1.0) == 0.0);
  CHECK(spectral_floor_map(0.0, 1.0) == 0.0);
}

TEST_CASE("projection examples") {
  const Matrix p1 = project(SpectralSet(3, 3, 2, 1.0), diag({3, 2, 0.2}, 3, 3));
  CHECK((p1 - diag({3, 2, 0}, 3, 3)).norm() <= 1e-12);
  const Matrix p2 = project(SpectralSet(2, 2, 2, 1.0), diag({0.7, 0.3}, 2, 2));
  CHECK((p2 - diag({1, 0}, 2, 2)).norm() <= 1e-12);
  // Everything below sigma/2: the leading direction is lifted.
  const Matrix p3 = project(SpectralSet(2, 3, 2, 1.0), diag({0.2, 0.1}, 2, 3));
  CHECK((p3 - diag({1, 0}, 2, 3)).norm() <= 1e-12);
  CHECK_THROWS_AS(project(SpectralSet(2, 2, 1, 1.0), Matrix::Zero(2, 2)), DegenerateInputError);
  CHECK_THROWS_AS(project(SpectralSet(2, 2, 1, 1.0), Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("projection: membership, fixed points, idempotence, invariance") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n1 = 2 + trial % 4, n2 = 2 + (trial / 4) % 4;
    const std::size_t r = 1 + trial % std::min(n1, n2);
    const double sigma = oracle::uniform(rng, 0.2, 2.0);
    const SpectralSet set(n1, n2, r, sigma);
    const Matrix x = oracle::gaussian(rng, n1, n2, oracle::uniform(rng, 0.05, 2.0));
    const Matrix p = project(set, x);
    CHECK(contains(set, p, 1e-9));
    CHECK((project(set, p) - p).norm() <= 1e-10 * (1 + p.norm()));

    const Matrix q1 = oracle::orthogonal(rng, n1), q2 = oracle::orthogonal(rng, n2);
    CHECK((project(set, q1 * x * q2.transpose()) - q1 * p * q2.transpose()).norm() <= 1e-8 * (1 + p.norm()));

    const Matrix z = oracle::random_member(rng, n1, n2, r, sigma, 3.0);
    CHECK((project(set, z) - z).norm() <= 1e-10 * (1 + z.norm()));
  }
}

TEST_CASE("projection is a nearest point") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n1 = trial % 2 ? 4 : 3, n2 = 3;
    const std::size_t r = 1 + trial % 3;
    const SpectralSet set(n1, n2, r, 1.0);
    const Matrix x = oracle::gaussian(rng, n1, n2, oracle::uniform(rng, 0.2, 1.5));
    const double d = (x - project(set, x)).norm();
    for (int k = 0; k < 500; ++k) {
      const Matrix z = oracle::random_member(rng, n1, n2, r, 1.0, 3.0);
      CHECK(d <= (x - z).norm() + 1e-9);
    }
  }
}

TEST_CASE("projection is continuous near the set") {
  std::mt19937_64 rng(33);
  const SpectralSet set(5, 4, 2, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix z = oracle::random_member(rng, 5, 4, 2, 1.0, 2.0);
    Matrix delta = oracle::gaussian(rng, 5, 4);
    delta *= 0.2 / delta.norm();
    const Matrix p0 = project(set, z + delta);
    for (double eps : {1e-3, 1e-5, 1e-7}) {
      Matrix tweak = oracle::gaussian(rng, 5, 4);
      tweak *= eps / tweak.norm();
      // Projection onto a prox-regular set is Lipschitz near the set.
      CHECK((project(set, z + delta + tweak) - p0).norm() <= 10 * eps);
    }
  }
}

TEST_CASE("truncated rank projection") {
  CHECK((truncated_rank_project(diag({3, 2, 1}, 3, 3), 2) - diag({3, 2, 0}, 3, 3)).norm() <= 1e-12);
  std::mt19937_64 rng(34);
  const Matrix x = oracle::gaussian(rng, 4, 5);
  CHECK((truncated_rank_project(x, 4) - x).norm() <= 1e-12 * x.norm());
  CHECK((truncated_rank_project(x, 9) - x).norm() <= 1e-12 * x.norm());
  CHECK_THROWS_AS(truncated_rank_project(x, 0), ParameterError);
  for (int k = 0; k < 20; ++k) {
    const Matrix y = oracle::gaussian(rng, 4, 4);
    const auto top = oracle::top_singular(y);
    const Matrix ref = top.sigma * top.u * top.v.transpose();
    CHECK((truncated_rank_project(y, 1) - ref).norm() <= 1e-8 * y.norm());
  }
}

TEST_CASE("SVD backend contract and spectral helpers") {
  std::mt19937_64 rng(35);
  for (auto [n1, n2] : {std::pair{40, 50}, std::pair{7, 3}, std::pair{1, 6}}) {
    const Matrix x = oracle::gaussian(rng, n1, n2);
    const Svd s = thin_svd(x);
    for (Eigen::Index j = 1; j < s.s.size(); ++j) CHECK(s.s[j - 1] >= s.s[j]);
    CHECK((s.u * s.s.asDiagonal() * s.v.transpose() - x).norm() <= 1e-10 * x.norm());
    CHECK(s.s[0] == doctest::Approx(oracle::top_singular(x).sigma).epsilon(1e-9));
    CHECK(nuclear_norm(x) == doctest::Approx(s.s.sum()));
  }
  const Matrix shrunk = singular_value_shrink(diag({3, 1, 0.2}, 3, 3), 1.0);
  CHECK((shrunk - diag({2, 0, 0}, 3, 3)).norm() <= 1e-12);
  const Matrix x = oracle::gaussian(rng, 5, 4);
  const Svd sx = thin_svd(x);
  Vector soft = (sx.s.array() - 0.7).max(0.0);
  CHECK((singular_value_shrink(x, 0.7) - sx.u * soft.asDiagonal() * sx.v.transpose()).norm() <= 1e-10);
}
