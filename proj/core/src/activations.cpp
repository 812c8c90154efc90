#include "originet/activations.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

#include "originet/error.hpp"

namespace originet {

Activation Activation::of(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Sigmoid: return sigmoid();
    case ActivationKind::Tanh: return tanh();
    case ActivationKind::ReLU: return relu();
    case ActivationKind::ELU: return elu();
    case ActivationKind::LeakyReLU: return leaky_relu();
    case ActivationKind::RReLU: return rrelu();
  }
  throw ArgumentError("unknown activation kind");
}

std::string_view activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::ELU: return "elu";
    case ActivationKind::LeakyReLU: return "leaky_relu";
    case ActivationKind::RReLU: return "rrelu";
  }
  return "unknown";
}

ActivationKind parse_activation_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "leakyrelu" || lower == "lrelu") lower = "leaky_relu";
  for (ActivationKind kind : all_activation_kinds()) {
    if (activation_name(kind) == lower) return kind;
  }
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

std::vector<ActivationKind> all_activation_kinds() {
  return {ActivationKind::Sigmoid, ActivationKind::Tanh,      ActivationKind::ReLU,
          ActivationKind::ELU,     ActivationKind::LeakyReLU, ActivationKind::RReLU};
}

void validate(const Activation& act) {
  const bool needs_alpha = act.kind == ActivationKind::ELU ||
                           act.kind == ActivationKind::LeakyReLU ||
                           act.kind == ActivationKind::RReLU;
  if (needs_alpha && !(act.alpha > 0.0)) {
    throw ArgumentError(std::string(activation_name(act.kind)) + ": alpha must be positive");
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double activate(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::Sigmoid: return stable_sigmoid(x);
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::ReLU: return x < 0.0 ? 0.0 : x;
    case ActivationKind::ELU: return x < 0.0 ? act.alpha * std::expm1(x) : x;
    case ActivationKind::LeakyReLU: return x < 0.0 ? act.alpha * x : x;
    case ActivationKind::RReLU: {
      const double s = stable_sigmoid(x);
      return x < 0.0 ? s * (1.0 + act.alpha * x) : s * (1.0 + x);
    }
  }
  return 0.0;
}

double activate_derivative(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::Sigmoid: {
      const double s = stable_sigmoid(x);
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::ReLU: return x < 0.0 ? 0.0 : 1.0;
    case ActivationKind::ELU: return x < 0.0 ? act.alpha * std::exp(x) : 1.0;
    case ActivationKind::LeakyReLU: return x < 0.0 ? act.alpha : 1.0;
    case ActivationKind::RReLU: {
      // d/dx [s (1 + a x)] = s (1 - s) (1 + a x) + a s, with a = 1 on x >= 0.
      const double s = stable_sigmoid(x);
      const double a = x < 0.0 ? act.alpha : 1.0;
      return s * (1.0 - s) * (1.0 + a * x) + a * s;
    }
  }
  return 0.0;
}

namespace {

template <typename Fn>
Tensor map_checked(const Tensor& x, const char* what, Fn fn) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw NumericError(std::string(what) + ": non-finite input");
    out[i] = fn(x[i]);
  }
  return out;
}

}  // namespace

Tensor act_forward(const Activation& act, const Tensor& x) {
  validate(act);
  return map_checked(x, "act_forward", [&](double v) { return activate(act, v); });
}

Tensor act_derivative(const Activation& act, const Tensor& x) {
  validate(act);
  return map_checked(x, "act_derivative", [&](double v) { return activate_derivative(act, v); });
}

Tensor act_backward(const Activation& act, const Tensor& x, const Tensor& output_grad) {
  require_same_shape(x, output_grad, "act_backward");
  Tensor grad = act_derivative(act, x);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= output_grad[i];
  return grad;
}

std::vector<CurvePoint> activation_curve(const Activation& act, double x_min, double x_max,
                                         std::size_t steps) {
  if (!(x_min < x_max)) throw ArgumentError("activation curve: x_min must be below x_max");
  if (steps < 2) throw ArgumentError("activation curve: steps must be at least 2");
  validate(act);
  std::vector<CurvePoint> rows;
  rows.reserve(steps);
  const double span = x_max - x_min;
  for (std::size_t i = 0; i < steps; ++i) {
    // Last sample pinned to x_max so both endpoints are exact.
    const double x = i + 1 == steps ? x_max
                                    : x_min + span * static_cast<double>(i) /
                                                  static_cast<double>(steps - 1);
    rows.push_back({x, activate(act, x), activate_derivative(act, x)});
  }
  return rows;
}

std::string activation_curve_csv(const Activation& act, double x_min, double x_max,
                                 std::size_t steps) {
  std::string csv = "x,forward,derivative\n";
  char line[96];
  for (const CurvePoint& p : activation_curve(act, x_min, x_max, steps)) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.x, p.forward, p.derivative);
    csv += line;
  }
  return csv;
}

double rrelu_tabulated_derivative(double x, double alpha) {
  const double e = std::exp(x);
  const double a = x < 0.0 ? alpha : 1.0;
  return e * (e + a * x + 2.0) / ((e + 1.0) * (e + 1.0));
}

}  // namespace originet
