#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "originet/tensor.hpp"

namespace originet {

enum class ActivationKind { Sigmoid, Tanh, ReLU, ELU, LeakyReLU, RReLU };

/// An activation function together with its slope parameter. alpha is only
/// read by ELU, LeakyReLU and RReLU, and must be positive for those.
struct Activation {
  ActivationKind kind = ActivationKind::RReLU;
  double alpha = 0.1;

  static Activation sigmoid() { return {ActivationKind::Sigmoid, 0.0}; }
  static Activation tanh() { return {ActivationKind::Tanh, 0.0}; }
  static Activation relu() { return {ActivationKind::ReLU, 0.0}; }
  static Activation elu(double alpha = 1.0) { return {ActivationKind::ELU, alpha}; }
  static Activation leaky_relu(double alpha = 0.1) { return {ActivationKind::LeakyReLU, alpha}; }
  static Activation rrelu(double alpha = 0.1) { return {ActivationKind::RReLU, alpha}; }

  /// Default-parameterized activation for `kind`.
  static Activation of(ActivationKind kind);

  bool operator==(const Activation&) const = default;
};

std::string_view activation_name(ActivationKind kind);
/// Accepts the names produced by activation_name (case-insensitive).
ActivationKind parse_activation_kind(std::string_view name);
std::vector<ActivationKind> all_activation_kinds();

/// Throws ArgumentError when alpha is not positive for a kind that needs it.
void validate(const Activation& act);

/// Numerically stable logistic function.
double stable_sigmoid(double x);

// Scalar forms. RReLU evaluates
//   psi(x) = sigmoid(x) * (1 + alpha * x)   for x < 0
//   psi(x) = sigmoid(x) * (1 + x)           for x >= 0
// which equals (e^x + a e^x x) / (1 + e^x) without overflowing for large x.
double activate(const Activation& act, double x);
double activate_derivative(const Activation& act, double x);

/// The tabulated backward formula e^x (e^x + a x + 2) / (e^x + 1)^2 with a = alpha
/// for x < 0 and a = 1 otherwise. It agrees with activate_derivative for x >= 0
/// only; below zero it exceeds the true slope by (1 - alpha) * sigmoid(x).
/// Kept for comparison, not used by backprop.
double rrelu_tabulated_derivative(double x, double alpha = 0.1);

/// Elementwise forward pass. Non-finite input raises NumericError.
Tensor act_forward(const Activation& act, const Tensor& x);
/// Elementwise derivative. At exactly zero the ReLU-family uses the x >= 0 branch.
Tensor act_derivative(const Activation& act, const Tensor& x);
/// output_grad * act_derivative(x).
Tensor act_backward(const Activation& act, const Tensor& x, const Tensor& output_grad);

struct CurvePoint {
  double x;
  double forward;
  double derivative;
};

/// `steps` uniformly spaced samples from x_min to x_max inclusive.
std::vector<CurvePoint> activation_curve(const Activation& act, double x_min, double x_max,
                                         std::size_t steps);

/// CSV with header `x,forward,derivative`, 17 significant digits.
std::string activation_curve_csv(const Activation& act, double x_min, double x_max,
                                 std::size_t steps);

}  // namespace originet
