#pragma once

#include <functional>

#include "originet/tensor.hpp"

namespace originet {

using ScalarFunction = std::function<double(const Tensor&)>;

/// Compares `analytic_grad` against central differences (f(x+h) - f(x-h)) / 2h
/// of `fn` at `point`, element by element. Returns the largest
/// |a - n| / max(1, |a|, |n|).
double gradcheck(const ScalarFunction& fn, const Tensor& point, const Tensor& analytic_grad,
                 double h = 1e-5);

/// Central-difference gradient of `fn` at `point`.
Tensor numeric_gradient(const ScalarFunction& fn, const Tensor& point, double h = 1e-5);

/// max over elements of |a - n| / max(1, |a|, |n|).
double max_relative_discrepancy(const Tensor& analytic, const Tensor& numeric);

}  // namespace originet
