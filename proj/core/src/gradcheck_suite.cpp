#include "originet/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "originet/activations.hpp"
#include "originet/error.hpp"
#include "originet/gradcheck.hpp"
#include "originet/layers.hpp"
#include "originet/originet.hpp"
#include "originet/random.hpp"

namespace originet {

namespace {

constexpr double kActivationTol = 1e-7;
constexpr double kLayerTol = 1e-6;
constexpr double kModelTol = 1e-4;
// RReLU's slope jumps from 0.3 to 0.75 at zero, so a probe pair that
// straddles a pre-activation near zero measures the average slope. A smaller
// step makes such straddles rare without hurting the difference quotient.
constexpr double kModelStep = 1e-6;

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

Tensor doubled(Tensor t) {
  for (double& v : t.data()) v *= 2.0;
  return t;
}

std::vector<GradcheckCase> activation_cases(std::uint64_t seed, bool plant) {
  std::vector<GradcheckCase> out;
  for (ActivationKind kind : all_activation_kinds()) {
    const Activation act = Activation::of(kind);
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      double x = rng.uniform(-20.0, 20.0);
      if (std::abs(x) < 1e-6) x += x < 0.0 ? -1e-6 : 1e-6;
      // Keep both probes on the same side of the branch point.
      const double h = std::min(1e-6, std::abs(x) / 2.0);
      const double numeric = (activate(act, x + h) - activate(act, x - h)) / (2.0 * h);
      double analytic = activate_derivative(act, x);
      if (plant && out.empty()) analytic *= 2.0;
      const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    out.push_back({std::string(activation_name(kind)), worst, kActivationTol});
  }
  return out;
}

std::vector<GradcheckCase> layer_cases(std::uint64_t seed, bool plant) {
  std::vector<GradcheckCase> out;
  Rng rng(seed);
  auto finish = [&](const std::string& name, std::vector<double> parts) {
    out.push_back({name, *std::max_element(parts.begin(), parts.end()), kLayerTol});
  };
  auto maybe_plant = [&](Tensor g) { return plant && out.empty() ? doubled(std::move(g)) : g; };

  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t k : {3u, 5u}) {
      const Padding pad = Padding::uniform((k - 1) / 2);
      const Tensor x = random_tensor({2, 2, 7, 6}, rng);
      const Tensor w = random_tensor({3, 2, k, k}, rng);
      const Tensor b = random_tensor({3}, rng);
      const Tensor proj = random_tensor(conv2d_forward(x, w, b, stride, pad).shape(), rng);
      const ConvGrads g = conv2d_backward(x, w, proj, stride, pad);
      finish("conv2d k" + std::to_string(k) + " stride " + std::to_string(stride),
             {gradcheck([&](const Tensor& v) { return dot(conv2d_forward(v, w, b, stride, pad), proj); }, x,
                        maybe_plant(g.input)),
              gradcheck([&](const Tensor& v) { return dot(conv2d_forward(x, v, b, stride, pad), proj); }, w,
                        g.kernel),
              gradcheck([&](const Tensor& v) { return dot(conv2d_forward(x, w, v, stride, pad), proj); }, b,
                        g.bias)});
    }
  }

  {
    const Tensor x = random_tensor({3, 2, 3, 4}, rng, -2.0, 2.0);
    const Tensor gamma = random_tensor({2}, rng, 0.5, 1.5);
    const Tensor beta = random_tensor({2}, rng);
    const Tensor proj = random_tensor(x.shape(), rng);
    const auto fwd = batchnorm_forward(x, gamma, beta, Mode::Train, {});
    const BatchNormGrads g = batchnorm_backward(fwd.cache, gamma, proj);
    auto bn = [&](const Tensor& xv, const Tensor& gv, const Tensor& bv) {
      return dot(batchnorm_forward(xv, gv, bv, Mode::Train, {}).output, proj);
    };
    finish("batchnorm train",
           {gradcheck([&](const Tensor& v) { return bn(v, gamma, beta); }, x, maybe_plant(g.input)),
            gradcheck([&](const Tensor& v) { return bn(x, v, beta); }, gamma, g.gamma),
            gradcheck([&](const Tensor& v) { return bn(x, gamma, v); }, beta, g.beta)});
  }

  {
    const Tensor x = random_tensor({3, 5}, rng);
    const Tensor w = random_tensor({4, 5}, rng);
    const Tensor b = random_tensor({4}, rng);
    const Tensor proj = random_tensor({3, 4}, rng);
    const LinearGrads g = linear_backward(x, w, proj);
    finish("linear",
           {gradcheck([&](const Tensor& v) { return dot(linear_forward(v, w, b), proj); }, x, maybe_plant(g.input)),
            gradcheck([&](const Tensor& v) { return dot(linear_forward(x, v, b), proj); }, w, g.weight),
            gradcheck([&](const Tensor& v) { return dot(linear_forward(x, w, v), proj); }, b, g.bias)});
  }

  {
    const Tensor logits = random_tensor({4, 3}, rng, -3.0, 3.0);
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < 4; ++i) labels.push_back(rng.below(3));
    const LossResult lr = cross_entropy_loss(softmax(logits), labels);
    finish("softmax cross-entropy",
           {gradcheck([&](const Tensor& z) { return cross_entropy_loss(softmax(z), labels).loss; }, logits,
                      maybe_plant(lr.logits_grad))});
  }
  return out;
}

std::vector<GradcheckCase> model_cases(std::uint64_t seed, bool plant) {
  const ModelConfig config = tiny_model_config();
  const OrigiNet model = build(config, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Tensor batch = random_tensor({2, 1, config.input_size, config.input_size}, rng, 0.0, 1.0);
  const std::vector<std::size_t> labels{rng.below(config.num_classes), rng.below(config.num_classes)};

  const BackwardResult back = backward(model, forward(model, batch, Mode::Train).cache, labels);
  OrigiNet probe = model;
  std::vector<NamedParam> params = parameters(probe);
  std::vector<GradcheckCase> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor* slot = params[i].tensor;
    const Tensor saved = *slot;
    auto loss = [&](const Tensor& value) {
      *slot = value;
      return cross_entropy_loss(forward(probe, batch, Mode::Train).probs, labels).loss;
    };
    const Tensor analytic = plant && i == 0 ? doubled(back.grads.tensors[i]) : back.grads.tensors[i];
    out.push_back({params[i].name, gradcheck(loss, saved, analytic, kModelStep), kModelTol});
    *slot = saved;
  }
  return out;
}

}  // namespace

GradcheckScope parse_gradcheck_scope(const std::string& name) {
  if (name == "activation") return GradcheckScope::Activation;
  if (name == "layer") return GradcheckScope::Layer;
  if (name == "model") return GradcheckScope::Model;
  throw ArgumentError("unknown gradcheck scope '" + name + "' (activation, layer, model)");
}

ModelConfig tiny_model_config() {
  ModelConfig c;
  c.input_size = 16;
  c.block_depths = {4, 8};
  c.fc_width = 8;
  c.num_classes = 3;
  return c;
}

std::vector<GradcheckCase> run_gradcheck_suite(GradcheckScope scope, std::uint64_t seed, bool plant_fault) {
  switch (scope) {
    case GradcheckScope::Activation: return activation_cases(seed, plant_fault);
    case GradcheckScope::Layer: return layer_cases(seed, plant_fault);
    case GradcheckScope::Model: return model_cases(seed, plant_fault);
  }
  throw ArgumentError("unknown gradcheck scope");
}

}  // namespace originet
