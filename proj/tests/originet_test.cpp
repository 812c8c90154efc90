#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "originet/error.hpp"
#include "originet/gradcheck.hpp"
#include "originet/originet.hpp"
#include "originet/serialization.hpp"
#include "test_helpers.hpp"

using namespace originet;
using originet::testing::random_tensor;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.input_size = 16;
  c.block_depths = {4, 8};
  c.fc_width = 8;
  c.num_classes = 3;
  return c;
}

ModelConfig toy_config() {
  ModelConfig c;
  c.input_size = 8;
  c.block_depths = {4};
  c.num_classes = 2;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "originet_model_tests";
  fs::create_directories(dir);
  return dir / name;
}

// Largest relative discrepancy between backward() and central differences
// over every parameter of the model.
double model_gradcheck(const OrigiNet& model, const Tensor& batch, const std::vector<std::size_t>& labels) {
  const ForwardResult fwd = forward(model, batch, Mode::Train);
  const BackwardResult back = backward(model, fwd.cache, labels);
  OrigiNet probe = model;
  auto params = parameters(probe);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor* slot = params[i].tensor;
    const Tensor saved = *slot;
    auto loss = [&](const Tensor& value) {
      *slot = value;
      const ForwardResult r = forward(probe, batch, Mode::Train);
      return cross_entropy_loss(r.probs, labels).loss;
    };
    worst = std::max(worst, gradcheck(loss, saved, back.grads.tensors[i]));
    *slot = saved;
  }
  return worst;
}

}  // namespace

TEST_SUITE("model structure") {
  TEST_CASE("default parameter count") {
    const ModelConfig c;
    CHECK(param_count(c) == 1871460);
    CHECK(param_count(build(c, 0)) == 1871460);
    CHECK(oracle::param_count_arithmetic(c) == 1871460);
    CHECK(weight_layer_count(c) == 10);
    CHECK(c.feature_length() == 6144);
  }

  TEST_CASE("ablation parameter counts") {
    ModelConfig lfc;
    lfc.augmented = false;
    CHECK(param_count(lfc) == 1084388);
    CHECK(param_count(ModelConfig{}) - param_count(lfc) == 6144 * 128 + 128 + 128 * 4);
    ModelConfig ks1, ks2;
    ks1.kernel_small = 1;
    ks1.kernel_large = 3;
    ks2.kernel_small = 5;
    ks2.kernel_large = 7;
    CHECK(param_count(ks1) == 1662180);
    CHECK(param_count(ks2) == 2220260);
    ModelConfig small_input;
    small_input.input_size = 64;
    CHECK(param_count(small_input) == 691812);
    for (const ModelConfig& c : {lfc, ks1, ks2, small_input, tiny_config(), toy_config()})
      CHECK(param_count(build(c, 3)) == oracle::param_count_arithmetic(c));
  }

  TEST_CASE("hand-counted toy and tiny models") {
    // toy: convs 1*4*9+4 + 1*4*25+4, BN 8, two FC 64->128, classifier 256->2.
    CHECK(param_count(toy_config()) == 17306);
    CHECK(param_count(tiny_config()) == 3387);
  }

  TEST_CASE("config validation names the field") {
    auto expect_field = [](ModelConfig c, const std::string& field) {
      try {
        c.validate();
        FAIL("expected ConfigError for " << field);
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(field) != std::string::npos);
      }
    };
    ModelConfig c;
    c.block_depths = {16, 16, 64, 96};
    expect_field(c, "block_depths");
    c = {};
    c.kernel_small = 4;
    expect_field(c, "kernel_small");
    c = {};
    c.kernel_large = 3;
    expect_field(c, "kernel");
    c = {};
    c.input_size = 100;
    expect_field(c, "input_size");
    c = {};
    c.num_classes = 1;
    expect_field(c, "num_classes");
    CHECK_THROWS_AS(build(c, 0), ConfigError);
  }

  TEST_CASE("same seed gives identical parameters") {
    const OrigiNet a = build(tiny_config(), 17), b = build(tiny_config(), 17), c = build(tiny_config(), 18);
    const auto pa = parameters(a), pb = parameters(b), pc = parameters(c);
    REQUIRE(pa.size() == pb.size());
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i].name == pb[i].name);
      CHECK(*pa[i].tensor == *pb[i].tensor);
      any_diff = any_diff || !(*pa[i].tensor == *pc[i].tensor);
    }
    CHECK(any_diff);
    CHECK(pa.front().name == "block1.conv_small.weight");
    CHECK(pa.back().name == "classifier.bias");
  }
}

TEST_SUITE("model forward") {
  TEST_CASE("default shape chain") {
    const ModelConfig c;
    const OrigiNet model = build(c, 1);
    const ForwardResult r = forward(model, random_tensor({2, 1, 128, 128}, 5, 0.0, 1.0), Mode::Train);
    REQUIRE(r.cache.blocks.size() == 4);
    const Shape expected[] = {{2, 16, 64, 64}, {2, 32, 32, 32}, {2, 64, 16, 16}};
    for (std::size_t k = 0; k < 3; ++k) CHECK(r.cache.blocks[k + 1].input.shape() == expected[k]);
    CHECK(r.cache.feature_shape == Shape{2, 96, 8, 8});
    CHECK(r.cache.features.shape() == Shape{2, 6144});
    CHECK(r.cache.concat.shape() == Shape{2, 256});
    CHECK(r.probs.shape() == Shape{2, 4});
  }

  TEST_CASE("rows sum to one, entries positive; eval deterministic") {
    OrigiNet model = build(tiny_config(), 2);
    const Tensor batch = random_tensor({5, 1, 16, 16}, 6, 0.0, 1.0);
    const ForwardResult tr = forward(model, batch, Mode::Train);
    apply_batchnorm_stats(model, tr.stats);
    const ForwardResult e1 = forward(model, batch, Mode::Eval);
    const ForwardResult e2 = forward(model, batch, Mode::Eval);
    CHECK(e1.probs == e2.probs);
    for (const Tensor* p : {&tr.probs, &e1.probs})
      for (std::size_t r = 0; r < 5; ++r) {
        double s = 0.0;
        for (std::size_t z = 0; z < 3; ++z) {
          CHECK(p->at(r, z) > 0.0);
          s += p->at(r, z);
        }
        CHECK(std::abs(s - 1.0) < 1e-9);
      }
  }

  TEST_CASE("zero input gives uniform probabilities") {
    const OrigiNet model = build(tiny_config(), 4);
    const ForwardResult r = forward(model, Tensor({2, 1, 16, 16}), Mode::Train);
    for (double p : r.probs.data()) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("eval mode needs batch-norm statistics") {
    const OrigiNet model = build(tiny_config(), 4);
    CHECK_THROWS_AS(forward(model, Tensor({1, 1, 16, 16}), Mode::Eval), StateError);
  }

  TEST_CASE("shape mismatch") {
    const OrigiNet model = build(tiny_config(), 4);
    CHECK_THROWS_AS(forward(model, Tensor({1, 1, 32, 32}), Mode::Train), DimensionError);
    CHECK_THROWS_AS(forward(model, Tensor({1, 3, 16, 16}), Mode::Train), DimensionError);
  }
}

TEST_SUITE("model backward") {
  TEST_CASE("full-model gradcheck on the tiny config") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const OrigiNet model = build(tiny_config(), seed);
      const Tensor batch = random_tensor({2, 1, 16, 16}, 100 + seed, 0.0, 1.0);
      const std::vector<std::size_t> labels{seed % 3, (seed + 1) % 3};
      CAPTURE(seed);
      CHECK(model_gradcheck(model, batch, labels) < 1e-4);
    }
  }

  TEST_CASE("single-FC variant gradcheck") {
    ModelConfig c = tiny_config();
    c.augmented = false;
    c.kernel_small = 1;
    c.kernel_large = 3;
    // A 1x1 branch puts pre-activations within h of RReLU's slope jump at 0;
    // a smooth activation keeps central differences meaningful.
    c.activation = Activation::tanh();
    const OrigiNet model = build(c, 9);
    CHECK(model_gradcheck(model, random_tensor({3, 1, 16, 16}, 10, 0.0, 1.0), {0, 2, 1}) < 1e-4);
  }

  TEST_CASE("zero logit gradient gives zero parameter gradients") {
    const OrigiNet model = build(tiny_config(), 1);
    const ForwardResult r = forward(model, random_tensor({2, 1, 16, 16}, 2), Mode::Train);
    const ModelGrads g = backward_from_logits(model, r.cache, Tensor({2, 3}));
    REQUIRE(g.tensors.size() == parameters(model).size());
    for (const Tensor& t : g.tensors) CHECK(max_abs(t) == 0.0);
  }

  TEST_CASE("identical parallel FC layers get identical gradients") {
    OrigiNet model = build(tiny_config(), 1);
    model.fc_b = model.fc_a;
    // The classifier reads the two halves through its own weights, so mirror
    // those as well for the paths to be identical.
    for (std::size_t z = 0; z < 3; ++z)
      for (std::size_t i = 0; i < 8; ++i) model.classifier.weight.at(z, 8 + i) = model.classifier.weight.at(z, i);
    const ForwardResult r = forward(model, random_tensor({2, 1, 16, 16}, 3), Mode::Train);
    const BackwardResult b = backward(model, r.cache, std::vector<std::size_t>{0, 2});
    const auto params = parameters(model);
    std::size_t fa = 0, fb = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i].name == "fc_a.weight") fa = i;
      if (params[i].name == "fc_b.weight") fb = i;
    }
    REQUIRE(fb > fa);
    CHECK(b.grads.tensors[fa] == b.grads.tensors[fb]);
    CHECK(b.grads.tensors[fa + 1] == b.grads.tensors[fb + 1]);
  }

  TEST_CASE("stale, eval-mode or missing caches are refused") {
    OrigiNet model = build(tiny_config(), 1);
    const std::vector<std::size_t> labels{1};
    CHECK_THROWS_AS(backward(model, ForwardCache{}, labels), StateError);
    const ForwardResult r = forward(model, random_tensor({1, 1, 16, 16}, 2), Mode::Train);
    apply_batchnorm_stats(model, r.stats);
    const ForwardResult e = forward(model, random_tensor({1, 1, 16, 16}, 2), Mode::Eval);
    CHECK_THROWS_AS(backward(model, e.cache, labels), StateError);
    model.revision += 1;
    CHECK_THROWS_AS(backward(model, r.cache, labels), StateError);
  }
}

TEST_SUITE("weights file") {
  TEST_CASE("round trip is bit-exact") {
    OrigiNet model = build(tiny_config(), 12);
    const Tensor batch = random_tensor({3, 1, 16, 16}, 13, 0.0, 1.0);
    apply_batchnorm_stats(model, forward(model, batch, Mode::Train).stats);
    const fs::path path = scratch("tiny.ognw");
    save_weights(model, path);
    const OrigiNet back = load_weights(path, tiny_config());
    CHECK(back.config == model.config);
    CHECK(forward(back, batch, Mode::Eval).probs == forward(model, batch, Mode::Eval).probs);
    CHECK(forward(back, batch, Mode::Train).probs == forward(model, batch, Mode::Train).probs);

    const fs::path again = scratch("tiny2.ognw");
    save_weights(back, again);
    std::ifstream a(path, std::ios::binary), b(again, std::ios::binary);
    const std::string ba((std::istreambuf_iterator<char>(a)), {}), bb((std::istreambuf_iterator<char>(b)), {});
    CHECK(ba == bb);
  }

  TEST_CASE("errors") {
    const OrigiNet model = build(tiny_config(), 12);
    const fs::path path = scratch("trunc.ognw");
    save_weights(model, path);
    CHECK_THROWS_AS(load_weights(path, toy_config()), ConfigError);
    fs::resize_file(path, fs::file_size(path) - 3);
    CHECK_THROWS_AS(load_weights(path), FormatError);
    std::ofstream(scratch("junk.ognw")) << "definitely not weights";
    CHECK_THROWS_AS(load_weights(scratch("junk.ognw")), FormatError);
    CHECK_THROWS_AS(load_weights(""), IoError);
    CHECK_THROWS_AS(save_weights(model, ""), IoError);
    CHECK_THROWS_AS(load_weights(scratch("does_not_exist.ognw")), IoError);
  }
}
