#include "originet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "originet/error.hpp"

namespace originet {

Tensor numeric_gradient(const ScalarFunction& fn, const Tensor& point, double h) {
  if (!(h > 0.0)) throw ArgumentError("gradcheck: step h must be positive");
  Tensor probe = point;
  Tensor grad(point.shape());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double x = point[i];
    probe[i] = x + h;
    const double up = fn(probe);
    probe[i] = x - h;
    const double down = fn(probe);
    probe[i] = x;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_discrepancy(const Tensor& analytic, const Tensor& numeric) {
  require_same_shape(analytic, numeric, "gradcheck");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double scale = std::max({1.0, std::abs(a), std::abs(n)});
    worst = std::max(worst, std::abs(a - n) / scale);
  }
  return worst;
}

double gradcheck(const ScalarFunction& fn, const Tensor& point, const Tensor& analytic_grad,
                 double h) {
  require_same_shape(point, analytic_grad, "gradcheck point/analytic");
  return max_relative_discrepancy(analytic_grad, numeric_gradient(fn, point, h));
}

}  // namespace originet
