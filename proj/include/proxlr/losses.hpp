#pragma once

#include <string>
#include <string_view>

#include "proxlr/sensing.hpp"
#include "proxlr/types.hpp"

namespace proxlr {

enum class LossKind { AbsoluteValue, Scad, Mcp };

/// A scalar loss l with l(0) = 0, l >= 0, l even, and a weak-convexity
/// modulus eta (l + eta/2 t^2 is convex).
///
///   AbsoluteValue: |t|,                                     eta = 0
///   Scad(theta>2): |t| on [0,1], quadratic blend to (theta+1)/2 at theta,
///                  constant beyond,                          eta = 1/(theta-1)
///   Mcp(theta>0):  |t| - t^2/(2 theta) on [0,theta], theta/2 beyond,
///                                                           eta = 1/theta
class ScalarLoss {
 public:
  static ScalarLoss absolute_value();
  /// Throws ParameterError unless theta > 2.
  static ScalarLoss scad(double theta);
  /// Throws ParameterError unless theta > 0.
  static ScalarLoss mcp(double theta);

  /// Parses `l1`, `scad:<theta>` or `mcp:<theta>`.
  static ScalarLoss parse(std::string_view spec);

  LossKind kind() const { return kind_; }
  double theta() const { return theta_; }
  double eta() const { return eta_; }

  /// Largest admissible prox parameter (exclusive); +inf when eta = 0.
  double max_mu() const;

  /// Inverse of parse().
  std::string to_string() const;

 private:
  ScalarLoss(LossKind kind, double theta, double eta) : kind_(kind), theta_(theta), eta_(eta) {}

  LossKind kind_;
  double theta_;
  double eta_;
};

/// g(z) = sum_i l(z_i) on R^dim. Shares the modulus of its scalar loss.
struct SeparableLoss {
  ScalarLoss scalar;
  std::size_t dim;
};

double loss_eval(const ScalarLoss& l, double t);

/// argmin_u l(u) + (u - t)^2 / (2 mu). Throws ParameterError unless
/// 0 < mu < 1/eta.
double loss_prox(const ScalarLoss& l, double mu, double t);

double loss_eval(const SeparableLoss& g, const Vector& z);

/// Moreau envelope g^mu(z) = g(p) + |p - z|^2 / (2 mu), p = prox_{mu g}(z).
double envelope_eval(const SeparableLoss& g, double mu, const Vector& z);

/// grad g^mu(z) = (z - prox_{mu g}(z)) / mu.
Vector envelope_grad(const SeparableLoss& g, double mu, const Vector& z);

/// Envelope value and gradient from one prox sweep.
struct EnvelopeEval {
  double value;
  Vector grad;
};
EnvelopeEval envelope_eval_grad(const SeparableLoss& g, double mu, const Vector& z);

/// Gradient of X -> g^mu(y - A X): -A^*(grad g^mu(y - A X)).
Matrix composite_grad(const Observation& obs, const SeparableLoss& g, double mu, const Matrix& x);

}  // namespace proxlr
