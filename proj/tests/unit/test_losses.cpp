#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "proxlr/errors.hpp"
#include "proxlr/losses.hpp"

using namespace proxlr;

namespace {

std::vector<ScalarLoss> sample_losses() {
  return {ScalarLoss::absolute_value(), ScalarLoss::scad(2.5), ScalarLoss::scad(3.7), ScalarLoss::mcp(0.5),
          ScalarLoss::mcp(3.0)};
}

double admissible_mu(std::mt19937_64& rng, const ScalarLoss& l) {
  const double cap = std::min(l.max_mu(), 5.0);
  return oracle::uniform(rng, 0.02, 0.98) * cap;
}

}  // namespace

TEST_CASE("loss values") {
  const auto scad = ScalarLoss::scad(3.0);
  CHECK(loss_eval(scad, 0.5) == 0.5);
  CHECK(loss_eval(scad, 10.0) == 2.0);
  CHECK(loss_eval(scad, 3.0) == doctest::Approx(2.0));
  CHECK(loss_eval(scad, -10.0) == 2.0);
  const auto mcp = ScalarLoss::mcp(2.0);
  CHECK(loss_eval(mcp, 1.0) == doctest::Approx(0.75));
  CHECK(loss_eval(mcp, 5.0) == 1.0);
  CHECK(loss_eval(ScalarLoss::absolute_value(), -2.5) == 2.5);

  CHECK(scad.eta() == doctest::Approx(0.5));
  CHECK(mcp.eta() == doctest::Approx(0.5));
  CHECK(ScalarLoss::absolute_value().eta() == 0.0);
}

TEST_CASE("loss shape: zero at zero, even, nondecreasing, continuous") {
  std::mt19937_64 rng(21);
  for (const auto& l : sample_losses()) {
    CAPTURE(l.to_string());
    CHECK(loss_eval(l, 0.0) == 0.0);
    double prev = 0.0;
    for (double t = 0.0; t <= 8.0; t += 1e-3) {
      const double v = loss_eval(l, t);
      CHECK(v >= prev - 1e-15);
      CHECK(std::abs(v - prev) <= 1.5e-3);  // 1-Lipschitz
      CHECK(loss_eval(l, -t) == v);
      prev = v;
    }
  }
}

TEST_CASE("SCAD saturates beyond theta") {
  std::mt19937_64 rng(22);
  for (double theta : {2.1, 2.5, 3.1, 7.0}) {
    const auto l = ScalarLoss::scad(theta);
    for (int k = 0; k < 100; ++k) {
      const double t = theta + std::exp(oracle::uniform(rng, -10, 6));
      CHECK(loss_eval(l, t) == (theta + 1) / 2);
      CHECK(loss_eval(l, -t) == (theta + 1) / 2);
    }
  }
}

TEST_CASE("weak convexity certificate") {
  std::mt19937_64 rng(23);
  for (const auto& l : sample_losses()) {
    auto h = [&](double u) { return loss_eval(l, u) + 0.5 * l.eta() * u * u; };
    for (int k = 0; k < 2000; ++k) {
      const double a = oracle::uniform(rng, -10, 10);
      const double b = oracle::uniform(rng, -10, 10);
      const double w = oracle::uniform(rng, 0, 1);
      CHECK(h(w * a + (1 - w) * b) <= w * h(a) + (1 - w) * h(b) + 1e-10 * (1 + std::abs(a) + std::abs(b)));
    }
  }
}

TEST_CASE("prox examples") {
  CHECK(loss_prox(ScalarLoss::absolute_value(), 0.5, 2.0) == 1.5);
  CHECK(loss_prox(ScalarLoss::scad(3.0), 0.5, 10.0) == 10.0);
  for (const auto& l : sample_losses()) CHECK(loss_prox(l, 0.3, 0.0) == 0.0);
  CHECK(std::abs(oracle::prox(ScalarLoss::absolute_value(), 0.5, 2.0) - 1.5) <= 1e-7);
}

TEST_CASE("prox matches the brute-force oracle on a dense grid") {
  for (double theta : {2.2, 3.0, 4.5}) {
    for (double frac : {0.1, 0.5, 0.9}) {
      for (const auto& l : {ScalarLoss::scad(theta), ScalarLoss::mcp(theta), ScalarLoss::absolute_value()}) {
        const double mu = frac * std::min(l.max_mu(), 3.0);
        for (double t = -8.0; t <= 8.0; t += 0.37) {
          CAPTURE(l.to_string());
          CAPTURE(mu);
          CAPTURE(t);
          // The oracle can only resolve the minimizer to about
          // sqrt(2 mu eps |f|), where the quadratic rise drowns in rounding.
          const double p = oracle::prox(l, mu, t);
          const double f = loss_eval(l, p) + (p - t) * (p - t) / (2 * mu);
          const double resolution = 4.0 * std::sqrt(2.0 * mu * 2.2e-16 * (1.0 + f));
          CHECK(std::abs(loss_prox(l, mu, t) - p) <= std::max(1e-8, resolution));
        }
      }
    }
  }
}

TEST_CASE("prox is optimal against random candidates and Lipschitz") {
  std::mt19937_64 rng(24);
  for (const auto& l : sample_losses()) {
    for (int k = 0; k < 300; ++k) {
      const double mu = admissible_mu(rng, l);
      const double t = oracle::uniform(rng, -12, 12);
      const double p = loss_prox(l, mu, t);
      const double fp = loss_eval(l, p) + (p - t) * (p - t) / (2 * mu);
      for (int c = 0; c < 100; ++c) {
        const double u = oracle::uniform(rng, -15, 15);
        CHECK(fp <= loss_eval(l, u) + (u - t) * (u - t) / (2 * mu) + 1e-12);
      }
      const double t2 = oracle::uniform(rng, -12, 12);
      const double bound = std::abs(t - t2) / (1 - mu * l.eta());
      CHECK(std::abs(p - loss_prox(l, mu, t2)) <= bound * (1 + 1e-12) + 1e-14);
    }
  }
}

TEST_CASE("prox parameter range") {
  CHECK_THROWS_AS(loss_prox(ScalarLoss::scad(3.0), 2.0, 1.0), ParameterError);
  CHECK_THROWS_AS(loss_prox(ScalarLoss::scad(3.0), 2.5, 1.0), ParameterError);
  CHECK_THROWS_AS(loss_prox(ScalarLoss::mcp(1.0), 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(loss_prox(ScalarLoss::absolute_value(), 0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(loss_prox(ScalarLoss::absolute_value(), -1.0, 1.0), ParameterError);
  CHECK_NOTHROW(loss_prox(ScalarLoss::absolute_value(), 1e6, 1.0));
  CHECK_THROWS_AS(ScalarLoss::scad(2.0), ParameterError);
  CHECK_THROWS_AS(ScalarLoss::mcp(0.0), ParameterError);
}

TEST_CASE("loss spec strings") {
  CHECK(ScalarLoss::parse("l1").kind() == LossKind::AbsoluteValue);
  CHECK(ScalarLoss::parse("scad:2.5").theta() == 2.5);
  CHECK(ScalarLoss::parse("mcp:3").kind() == LossKind::Mcp);
  for (const char* bad : {"", "l2", "scad", "scad:", "scad:x", "scad:1.5", "mcp:-1", "scad:2.5x"})
    CHECK_THROWS_AS(ScalarLoss::parse(bad), ParameterError);
  for (const auto& l : sample_losses()) {
    const auto back = ScalarLoss::parse(l.to_string());
    CHECK(back.kind() == l.kind());
    CHECK(back.theta() == l.theta());
  }
}

TEST_CASE("envelope values and gradient") {
  const SeparableLoss l1{ScalarLoss::absolute_value(), 1};
  Vector z(1);
  z << 2.0;
  CHECK(envelope_eval(l1, 1.0, z) == doctest::Approx(1.5));
  CHECK(envelope_grad(l1, 1.0, z)[0] == doctest::Approx(1.0));
  const SeparableLoss scad{ScalarLoss::scad(2.5), 4};
  CHECK(envelope_eval(scad, 0.3, Vector::Zero(4)) == 0.0);
  CHECK(envelope_grad(scad, 0.3, Vector::Zero(4)).isZero());

  std::mt19937_64 rng(25);
  for (const auto& s : sample_losses()) {
    const SeparableLoss g{s, 12};
    for (int k = 0; k < 10; ++k) {
      const double mu = std::min(0.1, 0.5 * s.max_mu());
      const Vector zz = oracle::gaussian_vec(rng, 12, 3.0);
      const EnvelopeEval both = envelope_eval_grad(g, mu, zz);
      CHECK(both.value == doctest::Approx(envelope_eval(g, mu, zz)));
      CHECK((both.grad - envelope_grad(g, mu, zz)).norm() == 0.0);
      const Vector fd = oracle::fd_gradient_vec([&](const Vector& v) { return envelope_eval(g, mu, v); }, zz, 1e-6);
      CHECK((both.grad - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
      // Lipschitz bound of the envelope gradient.
      const Vector z2 = zz + oracle::gaussian_vec(rng, 12, 0.5);
      const double lip = std::max(1.0 / mu, s.eta() / (1 - mu * s.eta()));
      CHECK((envelope_grad(g, mu, z2) - both.grad).norm() <= lip * (z2 - zz).norm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("envelope sandwich and monotonicity in mu") {
  std::mt19937_64 rng(26);
  for (const auto& s : sample_losses()) {
    const SeparableLoss g{s, 8};
    for (int k = 0; k < 50; ++k) {
      const Vector z = oracle::gaussian_vec(rng, 8, 4.0);
      const double gz = loss_eval(g, z);
      double prev = -1.0;
      for (double mu : {0.4, 0.1, 1e-2, 1e-3}) {
        if (mu >= s.max_mu()) continue;
        const double e = envelope_eval(g, mu, z);
        CHECK(e >= 0.0);
        CHECK(e <= gz + 1e-12);
        CHECK(e >= prev - 1e-12);
        prev = e;
      }
    }
  }
}

TEST_CASE("composite gradient") {
  std::mt19937_64 rng(27);
  const SeparableLoss g{ScalarLoss::scad(2.7), 15};
  const Observation obs = oracle::random_observation(rng, 4, 5, 15);
  const Matrix x = oracle::gaussian(rng, 4, 5, 0.2);
  const double mu = 0.2;
  const Matrix grad = composite_grad(obs, g, mu, x);
  const Matrix fd = oracle::fd_gradient(
      [&](const Matrix& m) { return envelope_eval(g, mu, residual_map(obs, m)); }, x, 1e-6);
  CHECK((grad - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));

  // Zero residual gives zero gradient.
  const Matrix xs = oracle::gaussian(rng, 4, 5);
  const Observation exact(obs.op, obs.op->forward(xs));
  CHECK(composite_grad(exact, g, mu, xs).norm() <= 1e-12);

  // With a selection operator the gradient is the negated envelope gradient.
  std::vector<Matrix> mats;
  for (int k = 0; k < 6; ++k) {
    Matrix e = Matrix::Zero(2, 3);
    e(k % 2, k / 2) = 1.0;
    mats.push_back(e);
  }
  const Observation sel(std::make_shared<const SensingOperator>(mats), oracle::gaussian_vec(rng, 6, 3.0));
  const SeparableLoss g6{ScalarLoss::mcp(2.0), 6};
  const Matrix x6 = oracle::gaussian(rng, 2, 3);
  const Vector r = residual_map(sel, x6);
  const Vector eg = envelope_grad(g6, 0.3, r);
  const Matrix cg = composite_grad(sel, g6, 0.3, x6);
  CHECK((Eigen::Map<const Vector>(cg.data(), 6) + eg).norm() <= 1e-14);
}

TEST_CASE("dimension errors") {
  const SeparableLoss g{ScalarLoss::absolute_value(), 3};
  CHECK_THROWS_AS(envelope_eval(g, 0.1, Vector::Zero(4)), DimensionError);
  CHECK_THROWS_AS(envelope_grad(g, 0.1, Vector::Zero(2)), DimensionError);
  CHECK_THROWS_AS(loss_eval(g, Vector::Zero(2)), DimensionError);
}
