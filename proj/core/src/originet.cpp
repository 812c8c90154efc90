#include "originet/originet.hpp"

#include <cmath>
#include <string>

#include "originet/activations.hpp"
#include "originet/error.hpp"
#include "originet/random.hpp"

namespace originet {

namespace {

void he_init(Tensor& weight, std::size_t fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& w : weight.data()) w = rng.normal() * stddev;
}

ConvParams make_conv(std::size_t in_ch, std::size_t out_ch, std::size_t k, Rng& rng) {
  ConvParams conv{Tensor({out_ch, in_ch, k, k}), Tensor({out_ch}), k};
  he_init(conv.weight, in_ch * k * k, rng);
  return conv;
}

LinearParams make_linear(std::size_t fin, std::size_t fout, Rng& rng) {
  LinearParams fc{Tensor({fout, fin}), Tensor({fout})};
  he_init(fc.weight, fin, rng);
  return fc;
}

std::size_t concat_width(const ModelConfig& c) { return c.augmented ? 2 * c.fc_width : c.fc_width; }

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "branch sum");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace

std::vector<NamedParam> parameters(OrigiNet& model) {
  std::vector<NamedParam> out;
  for (std::size_t k = 0; k < model.blocks.size(); ++k) {
    HybridBlock& b = model.blocks[k];
    const std::string p = "block" + std::to_string(k + 1) + ".";
    out.push_back({p + "conv_small.weight", &b.small.weight});
    out.push_back({p + "conv_small.bias", &b.small.bias});
    out.push_back({p + "conv_large.weight", &b.large.weight});
    out.push_back({p + "conv_large.bias", &b.large.bias});
    out.push_back({p + "bn.gamma", &b.gamma});
    out.push_back({p + "bn.beta", &b.beta});
  }
  out.push_back({"fc_a.weight", &model.fc_a.weight});
  out.push_back({"fc_a.bias", &model.fc_a.bias});
  if (model.config.augmented) {
    out.push_back({"fc_b.weight", &model.fc_b.weight});
    out.push_back({"fc_b.bias", &model.fc_b.bias});
  }
  out.push_back({"classifier.weight", &model.classifier.weight});
  out.push_back({"classifier.bias", &model.classifier.bias});
  return out;
}

std::vector<ConstNamedParam> parameters(const OrigiNet& model) {
  std::vector<ConstNamedParam> out;
  for (const NamedParam& p : parameters(const_cast<OrigiNet&>(model))) {
    out.push_back({p.name, p.tensor});
  }
  return out;
}

OrigiNet build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  OrigiNet model;
  model.config = config;
  std::size_t in_ch = config.input_channels;
  std::size_t extent = config.input_size;
  for (std::size_t depth : config.block_depths) {
    HybridBlock block;
    block.small = make_conv(in_ch, depth, config.kernel_small, rng);
    block.large = make_conv(in_ch, depth, config.kernel_large, rng);
    block.gamma = Tensor({depth}, 1.0);
    block.beta = Tensor({depth}, 0.0);
    // The elementwise branch sum needs both branches to agree in shape.
    const std::size_t small_out = conv_output_extent(extent, (config.kernel_small - 1) / 2,
                                                     (config.kernel_small - 1) / 2,
                                                     config.kernel_small, 2);
    const std::size_t large_out = conv_output_extent(extent, (config.kernel_large - 1) / 2,
                                                     (config.kernel_large - 1) / 2,
                                                     config.kernel_large, 2);
    if (small_out != large_out || small_out * 2 != extent) {
      throw ConfigError("kernel pair " + std::to_string(config.kernel_small) + "/" +
                        std::to_string(config.kernel_large) + " does not halve extent " +
                        std::to_string(extent) + " consistently");
    }
    model.blocks.push_back(std::move(block));
    in_ch = depth;
    extent = small_out;
  }
  const std::size_t features = config.feature_length();
  model.fc_a = make_linear(features, config.fc_width, rng);
  if (config.augmented) model.fc_b = make_linear(features, config.fc_width, rng);
  model.classifier = make_linear(concat_width(config), config.num_classes, rng);
  return model;
}

std::size_t param_count(const OrigiNet& model) {
  std::size_t total = 0;
  for (const ConstNamedParam& p : parameters(model)) total += p.tensor->size();
  return total;
}

std::size_t param_count(const ModelConfig& config) {
  std::size_t total = 0;
  for (const LayerSummary& layer : summarize(config)) total += layer.params;
  return total;
}

std::vector<LayerSummary> summarize(const ModelConfig& config) {
  config.validate();
  std::vector<LayerSummary> rows;
  std::size_t in_ch = config.input_channels;
  std::size_t extent = config.input_size;
  for (std::size_t k = 0; k < config.block_depths.size(); ++k) {
    const std::size_t d = config.block_depths[k];
    extent /= 2;
    const std::string p = "block" + std::to_string(k + 1) + ".";
    for (std::size_t ks : {config.kernel_small, config.kernel_large}) {
      rows.push_back({p + "conv" + std::to_string(ks) + "x" + std::to_string(ks),
                      "conv stride 2", {d, extent, extent}, d * in_ch * ks * ks + d});
    }
    rows.push_back({p + "bn", "batchnorm", {d, extent, extent}, 2 * d});
    in_ch = d;
  }
  const std::size_t features = config.feature_length();
  rows.push_back({"fc_a", "linear", {config.fc_width}, features * config.fc_width + config.fc_width});
  if (config.augmented) {
    rows.push_back({"fc_b", "linear", {config.fc_width}, features * config.fc_width + config.fc_width});
  }
  rows.push_back({"classifier", "linear+softmax", {config.num_classes},
                  concat_width(config) * config.num_classes + config.num_classes});
  return rows;
}

std::size_t weight_layer_count(const ModelConfig& config) {
  return 2 * config.block_depths.size() + 2;
}

ForwardResult forward(const OrigiNet& model, const Tensor& batch, Mode mode) {
  const ModelConfig& cfg = model.config;
  require_rank(batch, 4, "originet input");
  if (batch.dim(1) != cfg.input_channels || batch.dim(2) != cfg.input_size ||
      batch.dim(3) != cfg.input_size) {
    throw DimensionError("originet input " + shape_string(batch.shape()) + " does not match [N, " +
                         std::to_string(cfg.input_channels) + ", " + std::to_string(cfg.input_size) +
                         ", " + std::to_string(cfg.input_size) + "]");
  }

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.mode = mode;
  cache.revision = model.revision;
  const std::size_t n = batch.dim(0);

  Tensor x = batch;
  for (const HybridBlock& block : model.blocks) {
    BlockCache bc;
    bc.pre_small = conv2d_forward(x, block.small.weight, block.small.bias, 2, block.small.padding());
    bc.pre_large = conv2d_forward(x, block.large.weight, block.large.bias, 2, block.large.padding());
    const Tensor summed = add(act_forward(cfg.activation, bc.pre_small),
                              act_forward(cfg.activation, bc.pre_large));
    BatchNormResult bn = batchnorm_forward(summed, block.gamma, block.beta, mode, block.stats);
    result.stats.push_back(std::move(bn.stats));
    bc.bn = std::move(bn.cache);
    bc.input = std::move(x);
    x = std::move(bn.output);
    if (mode == Mode::Train) cache.blocks.push_back(std::move(bc));
  }

  cache.feature_shape = x.shape();
  cache.features = x.reshaped({n, cfg.feature_length()});
  const Tensor a = linear_forward(cache.features, model.fc_a.weight, model.fc_a.bias);
  cache.concat = Tensor({n, concat_width(cfg)});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t f = 0; f < cfg.fc_width; ++f) cache.concat.at(b, f) = a.at(b, f);
  if (cfg.augmented) {
    const Tensor fb = linear_forward(cache.features, model.fc_b.weight, model.fc_b.bias);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t f = 0; f < cfg.fc_width; ++f) cache.concat.at(b, cfg.fc_width + f) = fb.at(b, f);
  }
  const Tensor logits = linear_forward(cache.concat, model.classifier.weight, model.classifier.bias);
  result.probs = softmax(logits);
  cache.probs = result.probs;
  cache.valid = true;
  return result;
}

void apply_batchnorm_stats(OrigiNet& model, std::span<const BatchNormStats> stats) {
  if (stats.size() != model.blocks.size()) {
    throw StateError("apply_batchnorm_stats: expected " + std::to_string(model.blocks.size()) +
                     " entries, got " + std::to_string(stats.size()));
  }
  for (std::size_t k = 0; k < stats.size(); ++k) model.blocks[k].stats = stats[k];
}

ModelGrads backward_from_logits(const OrigiNet& model, const ForwardCache& cache,
                                const Tensor& logits_grad) {
  if (!cache.valid) throw StateError("backward: missing forward cache");
  if (cache.mode != Mode::Train) throw StateError("backward: cache comes from an eval-mode forward");
  if (cache.revision != model.revision) {
    throw StateError("backward: stale cache (model revision " + std::to_string(model.revision) +
                     ", cache revision " + std::to_string(cache.revision) + ")");
  }
  if (cache.blocks.size() != model.blocks.size()) throw StateError("backward: cache/model block mismatch");
  require_same_shape(logits_grad, cache.probs, "backward logits_grad");

  const ModelConfig& cfg = model.config;
  const std::size_t n = logits_grad.dim(0);
  // Filled back to front, then laid out in parameters() order at the end.
  std::vector<Tensor> block_grads(6 * model.blocks.size());

  const LinearGrads cls = linear_backward(cache.concat, model.classifier.weight, logits_grad);
  Tensor grad_a({n, cfg.fc_width});
  Tensor grad_b;
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t f = 0; f < cfg.fc_width; ++f) grad_a.at(b, f) = cls.input.at(b, f);
  const LinearGrads fa = linear_backward(cache.features, model.fc_a.weight, grad_a);
  Tensor feature_grad = fa.input;
  LinearGrads fb;
  if (cfg.augmented) {
    grad_b = Tensor({n, cfg.fc_width});
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t f = 0; f < cfg.fc_width; ++f) grad_b.at(b, f) = cls.input.at(b, cfg.fc_width + f);
    fb = linear_backward(cache.features, model.fc_b.weight, grad_b);
    for (std::size_t i = 0; i < feature_grad.size(); ++i) feature_grad[i] += fb.input[i];
  }

  Tensor grad = feature_grad.reshaped(cache.feature_shape);
  for (std::size_t k = model.blocks.size(); k-- > 0;) {
    const HybridBlock& block = model.blocks[k];
    const BlockCache& bc = cache.blocks[k];
    BatchNormGrads bn = batchnorm_backward(bc.bn, block.gamma, grad);
    // The branch sum passes its gradient unchanged to both branches.
    const Tensor d_small = act_backward(cfg.activation, bc.pre_small, bn.input);
    const Tensor d_large = act_backward(cfg.activation, bc.pre_large, bn.input);
    ConvGrads cs = conv2d_backward(bc.input, block.small.weight, d_small, 2, block.small.padding());
    ConvGrads cl = conv2d_backward(bc.input, block.large.weight, d_large, 2, block.large.padding());
    grad = add(cs.input, cl.input);
    block_grads[6 * k + 0] = std::move(cs.kernel);
    block_grads[6 * k + 1] = std::move(cs.bias);
    block_grads[6 * k + 2] = std::move(cl.kernel);
    block_grads[6 * k + 3] = std::move(cl.bias);
    block_grads[6 * k + 4] = std::move(bn.gamma);
    block_grads[6 * k + 5] = std::move(bn.beta);
  }

  ModelGrads out;
  out.tensors = std::move(block_grads);
  out.tensors.push_back(fa.weight);
  out.tensors.push_back(fa.bias);
  if (cfg.augmented) {
    out.tensors.push_back(fb.weight);
    out.tensors.push_back(fb.bias);
  }
  out.tensors.push_back(cls.weight);
  out.tensors.push_back(cls.bias);
  return out;
}

BackwardResult backward(const OrigiNet& model, const ForwardCache& cache,
                        std::span<const std::size_t> labels) {
  if (!cache.valid) throw StateError("backward: missing forward cache");
  LossResult loss = cross_entropy_loss(cache.probs, labels);
  return {loss.loss, backward_from_logits(model, cache, loss.logits_grad)};
}

std::vector<std::size_t> argmax_rows(const Tensor& probs) {
  require_rank(probs, 2, "argmax_rows");
  std::vector<std::size_t> out(probs.dim(0), 0);
  for (std::size_t b = 0; b < probs.dim(0); ++b) {
    for (std::size_t k = 1; k < probs.dim(1); ++k) {
      if (probs.at(b, k) > probs.at(b, out[b])) out[b] = k;
    }
  }
  return out;
}

}  // namespace originet
