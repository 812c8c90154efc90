#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "originet/activations.hpp"
#include "originet/error.hpp"
#include "originet/gradcheck.hpp"
#include "originet/random.hpp"

using namespace originet;

namespace {

double central_difference(const Activation& act, double x, double h = 1e-6) {
  return (activate(act, x + h) - activate(act, x - h)) / (2.0 * h);
}

double relative(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_SUITE("activations") {
  TEST_CASE("forced-point forward values") {
    CHECK(activate(Activation::rrelu(), 0.0) == 0.5);
    CHECK(activate(Activation::relu(), -3.0) == 0.0);
    CHECK(activate(Activation::leaky_relu(0.1), -3.0) == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(activate(Activation::elu(), 0.0) == 0.0);
    CHECK(activate(Activation::sigmoid(), 0.0) == 0.5);
    CHECK(activate(Activation::tanh(), 0.0) == 0.0);
  }

  TEST_CASE("RReLU(2) against a high-precision value") {
    CHECK(std::abs(activate(Activation::rrelu(0.1), 2.0) - 2.642391233933647332) < 1e-14);
  }

  TEST_CASE("forced-point derivatives") {
    CHECK(activate_derivative(Activation::rrelu(), 0.0) == 0.75);
    CHECK(activate_derivative(Activation::sigmoid(), 0.0) == 0.25);
    CHECK(activate_derivative(Activation::relu(), 0.0) == 1.0);
    CHECK(activate_derivative(Activation::leaky_relu(), 0.0) == 1.0);
    CHECK(activate_derivative(Activation::elu(), 0.0) == 1.0);
    CHECK(activate_derivative(Activation::tanh(), 0.0) == 1.0);
  }

  TEST_CASE("RReLU derivative matches central differences at listed points") {
    for (double x : {-5.0, -1.0, -0.1, 0.1, 1.0, 5.0}) {
      CAPTURE(x);
      CHECK(relative(activate_derivative(Activation::rrelu(), x), central_difference(Activation::rrelu(), x)) < 1e-8);
    }
  }

  TEST_CASE("every kind matches central differences at 1000 random points") {
    for (ActivationKind kind : all_activation_kinds()) {
      const Activation act = Activation::of(kind);
      Rng rng(1234);
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        double x = rng.uniform(-20.0, 20.0);
        if (std::abs(x) < 1e-6) x = 1e-6 * (x < 0 ? -1.0 : 1.0) + x;
        const double h = std::min(1e-6, std::abs(x) / 2.0);
        worst = std::max(worst, relative(activate_derivative(act, x), central_difference(act, x, h)));
      }
      CAPTURE(activation_name(kind));
      CHECK(worst < 1e-7);
    }
  }

  TEST_CASE("RReLU is continuous at zero") {
    const Activation r = Activation::rrelu();
    CHECK(std::abs(activate(r, -1e-15) - 0.5) < 1e-12);
    CHECK(std::abs(activate(r, 1e-15) - 0.5) < 1e-12);
    CHECK(std::abs(activate_derivative(r, 1e-15) - 0.75) < 1e-12);
  }

  TEST_CASE("tabulated RReLU slope exceeds the true one by (1 - alpha) sigmoid below zero") {
    for (double x : {-10.0, -3.0, -1.0, -0.25, -1e-9}) {
      const double gap = rrelu_tabulated_derivative(x, 0.1) - activate_derivative(Activation::rrelu(0.1), x);
      CHECK(gap == doctest::Approx(0.9 * stable_sigmoid(x)).epsilon(1e-10));
    }
    for (double x : {0.0, 0.5, 3.0, 12.0})
      CHECK(rrelu_tabulated_derivative(x, 0.1) == doctest::Approx(activate_derivative(Activation::rrelu(0.1), x)).epsilon(1e-13));
    // The true slope has a jump at zero: 0.25 + 0.1 * 0.5 from the left.
    CHECK(activate_derivative(Activation::rrelu(0.1), -1e-14) == doctest::Approx(0.3).epsilon(1e-10));
  }

  TEST_CASE("range and growth properties") {
    const Activation r = Activation::rrelu();
    CHECK(std::abs(activate(r, -50.0)) < 1e-15);
    for (double x = 0.0; x <= 40.0; x += 0.37) CHECK(activate(r, x) <= 1.0 + x);
    double prev = activate(r, 0.0);
    for (double x = 0.01; x <= 40.0; x += 0.01) {
      const double v = activate(r, x);
      CHECK(v > prev);
      prev = v;
    }
    for (double x = -8.0; x < 0.0; x += 0.01) CHECK(activate_derivative(r, x) > 0.0);
    for (double x = -8.0; x < 0.0; x += 0.25) CHECK(activate_derivative(Activation::relu(), x) == 0.0);
    for (double x : {-30.0, -45.0, 30.0, 100.0}) CHECK(std::abs(activate_derivative(Activation::sigmoid(), x)) < 1e-10);
  }

  TEST_CASE("no overflow at extreme inputs") {
    const Activation r = Activation::rrelu();
    CHECK(activate(r, 800.0) == 801.0);
    CHECK(activate_derivative(r, 800.0) == 1.0);
    CHECK(std::isfinite(activate(r, -800.0)));
    CHECK(std::isfinite(activate(Activation::elu(), -800.0)));
    CHECK(stable_sigmoid(-800.0) == 0.0);
  }

  TEST_CASE("tensor forms and error cases") {
    const Tensor x({5}, std::vector<double>{-2.0, -0.5, 0.0, 0.5, 2.0});
    const Activation r = Activation::rrelu();
    const Tensor d = act_derivative(r, x);
    CHECK(act_backward(r, x, Tensor({5}, 1.0)) == d);
    CHECK(max_abs(act_backward(r, x, Tensor({5}))) == 0.0);
    CHECK_THROWS_AS(act_forward(r, Tensor({1}, NAN)), NumericError);
    CHECK_THROWS_AS(act_derivative(r, Tensor({1}, INFINITY)), NumericError);
    CHECK_THROWS_AS(act_backward(r, x, Tensor({4})), DimensionError);
    CHECK_THROWS_AS(validate(Activation::rrelu(0.0)), ArgumentError);
    CHECK_THROWS_AS(validate(Activation::elu(-1.0)), ArgumentError);
    CHECK_THROWS_AS(parse_activation_kind("swish"), ArgumentError);
    for (ActivationKind k : all_activation_kinds()) CHECK(parse_activation_kind(activation_name(k)) == k);
  }

  TEST_CASE("act_backward agrees with gradcheck") {
    Rng rng(9);
    Tensor x({3, 7});
    for (double& v : x.data()) v = rng.uniform(-4.0, 4.0);
    Tensor w({3, 7});
    for (double& v : w.data()) v = rng.uniform(-1.0, 1.0);
    for (ActivationKind k : all_activation_kinds()) {
      const Activation act = Activation::of(k);
      const Tensor g = act_backward(act, x, w);
      CHECK(gradcheck([&](const Tensor& v) { return dot(act_forward(act, v), w); }, x, g) < 1e-6);
    }
  }

  TEST_CASE("curves") {
    const auto sig = activation_curve(Activation::sigmoid(), -10.0, 10.0, 101);
    REQUIRE(sig.size() == 101);
    for (const auto& p : sig) {
      CHECK(p.forward > 0.0);
      CHECK(p.forward < 1.0);
    }
    CHECK(sig.back().x == 10.0);
    const auto th = activation_curve(Activation::tanh(), -10.0, 10.0, 3);
    CHECK(th.front().forward == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(th.back().forward == doctest::Approx(1.0).epsilon(1e-8));
    const auto rr = activation_curve(Activation::rrelu(), -2.0, 2.0, 5);
    CHECK(rr[2].x == 0.0);
    CHECK(rr[2].forward == 0.5);

    CHECK_THROWS_AS(activation_curve(Activation::relu(), 1.0, 1.0, 10), ArgumentError);
    CHECK_THROWS_AS(activation_curve(Activation::relu(), 0.0, 1.0, 1), ArgumentError);

    const std::string csv = activation_curve_csv(Activation::rrelu(), -1.0, 1.0, 3);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,forward,derivative");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
  }
}
