#include "proxlr/losses.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "proxlr/errors.hpp"

namespace proxlr {

ScalarLoss ScalarLoss::absolute_value() { return {LossKind::AbsoluteValue, 0.0, 0.0}; }

ScalarLoss ScalarLoss::scad(double theta) {
  if (!(theta > 2.0) || !std::isfinite(theta)) {
    throw ParameterError("SCAD requires theta > 2, got " + std::to_string(theta));
  }
  return {LossKind::Scad, theta, 1.0 / (theta - 1.0)};
}

ScalarLoss ScalarLoss::mcp(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ParameterError("MCP requires theta > 0, got " + std::to_string(theta));
  }
  return {LossKind::Mcp, theta, 1.0 / theta};
}

ScalarLoss ScalarLoss::parse(std::string_view spec) {
  if (spec == "l1") return absolute_value();
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ParameterError("unknown loss '" + std::string(spec) + "' (expected l1, scad:<theta>, mcp:<theta>)");
  }
  const auto name = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  double theta = 0.0;
  const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), theta);
  if (ec != std::errc() || ptr != arg.data() + arg.size()) {
    throw ParameterError("loss parameter '" + std::string(arg) + "' is not a number");
  }
  if (name == "scad") return scad(theta);
  if (name == "mcp") return mcp(theta);
  throw ParameterError("unknown loss '" + std::string(name) + "'");
}

double ScalarLoss::max_mu() const {
  return eta_ > 0.0 ? 1.0 / eta_ : std::numeric_limits<double>::infinity();
}

std::string ScalarLoss::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case LossKind::AbsoluteValue:
      return "l1";
    case LossKind::Scad:
      os << "scad:" << theta_;
      break;
    case LossKind::Mcp:
      os << "mcp:" << theta_;
      break;
  }
  return os.str();
}

double loss_eval(const ScalarLoss& l, double t) {
  const double a = std::abs(t);
  const double theta = l.theta();
  switch (l.kind()) {
    case LossKind::AbsoluteValue:
      return a;
    case LossKind::Scad:
      if (a <= 1.0) return a;
      if (a <= theta) return (-a * a + 2.0 * theta * a - 1.0) / (2.0 * (theta - 1.0));
      return (theta + 1.0) / 2.0;
    case LossKind::Mcp:
      if (a <= theta) return a - a * a / (2.0 * theta);
      return theta / 2.0;
  }
  return 0.0;
}

namespace {

void check_mu(const ScalarLoss& l, double mu) {
  if (!(mu > 0.0) || !(mu < l.max_mu())) {
    throw ParameterError("prox parameter mu = " + std::to_string(mu) + " outside (0, " +
                         std::to_string(l.max_mu()) + ") for loss " + l.to_string());
  }
}

// Prox for t >= 0; callers restore the sign. mu is already validated.
//
// On each piece l is smooth, so the minimizer of l(u) + (u-t)^2/(2mu) is the
// stationary point of that piece; strong convexity (mu < 1/eta) makes the
// pieces join into one continuous, nondecreasing map with knots
//   SCAD: t = 1 + mu, t = theta        MCP: t = mu, t = theta.
double prox_nonneg(const ScalarLoss& l, double mu, double t) {
  const double theta = l.theta();
  switch (l.kind()) {
    case LossKind::AbsoluteValue:
      return std::max(t - mu, 0.0);
    case LossKind::Scad:
      if (t <= 1.0 + mu) return std::max(t - mu, 0.0);
      if (t <= theta) return ((theta - 1.0) * t - mu * theta) / (theta - 1.0 - mu);
      return t;
    case LossKind::Mcp:
      if (t <= mu) return 0.0;
      if (t <= theta) return (t - mu) * theta / (theta - mu);
      return t;
  }
  return 0.0;
}

}  // namespace

double loss_prox(const ScalarLoss& l, double mu, double t) {
  check_mu(l, mu);
  const double p = prox_nonneg(l, mu, std::abs(t));
  return t < 0.0 ? -p : p;
}

double loss_eval(const SeparableLoss& g, const Vector& z) {
  if (static_cast<std::size_t>(z.size()) != g.dim) throw DimensionError("loss_eval: dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) acc += loss_eval(g.scalar, z[i]);
  return acc;
}

EnvelopeEval envelope_eval_grad(const SeparableLoss& g, double mu, const Vector& z) {
  if (static_cast<std::size_t>(z.size()) != g.dim) throw DimensionError("envelope: dimension mismatch");
  check_mu(g.scalar, mu);
  EnvelopeEval out{0.0, Vector(z.size())};
  const double inv_mu = 1.0 / mu;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double t = z[i];
    const double pa = prox_nonneg(g.scalar, mu, std::abs(t));
    const double p = t < 0.0 ? -pa : pa;
    const double d = t - p;
    out.value += loss_eval(g.scalar, p) + 0.5 * inv_mu * d * d;
    out.grad[i] = d * inv_mu;
  }
  return out;
}

double envelope_eval(const SeparableLoss& g, double mu, const Vector& z) {
  return envelope_eval_grad(g, mu, z).value;
}

Vector envelope_grad(const SeparableLoss& g, double mu, const Vector& z) {
  return envelope_eval_grad(g, mu, z).grad;
}

Matrix composite_grad(const Observation& obs, const SeparableLoss& g, double mu, const Matrix& x) {
  if (g.dim != obs.m()) throw DimensionError("composite_grad: loss dimension does not match m");
  const Vector outer = envelope_grad(g, mu, residual_map(obs, x));
  return -obs.op->adjoint(outer);
}

}  // namespace proxlr
