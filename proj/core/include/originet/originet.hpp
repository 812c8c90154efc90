#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "originet/config.hpp"
#include "originet/layers.hpp"
#include "originet/tensor.hpp"

namespace originet {

struct ConvParams {
  Tensor weight;  // [D, C, k, k]
  Tensor bias;    // [D]
  std::size_t kernel = 0;

  Padding padding() const { return Padding::uniform((kernel - 1) / 2); }
};

struct LinearParams {
  Tensor weight;  // [Fout, Fin]
  Tensor bias;    // [Fout]
};

/// Two stride-2 convolutions over the same input, each activated, summed
/// elementwise, then batch-normalized.
struct HybridBlock {
  ConvParams small;
  ConvParams large;
  Tensor gamma;
  Tensor beta;
  BatchNormStats stats;
};

struct OrigiNet {
  ModelConfig config;
  std::vector<HybridBlock> blocks;
  LinearParams fc_a;
  LinearParams fc_b;  // empty unless config.augmented
  LinearParams classifier;
  /// Bumped whenever parameters change; forward caches record it.
  std::uint64_t revision = 0;
};

struct NamedParam {
  std::string name;
  Tensor* tensor;
};
struct ConstNamedParam {
  std::string name;
  const Tensor* tensor;
};

/// Learnable tensors in build order: per block small conv (weight, bias),
/// large conv (weight, bias), BN (gamma, beta); then fc_a, fc_b (if
/// augmented), classifier.
std::vector<NamedParam> parameters(OrigiNet& model);
std::vector<ConstNamedParam> parameters(const OrigiNet& model);

/// He fan-in normal weights, zero biases, gamma = 1, beta = 0. Deterministic in seed.
OrigiNet build(const ModelConfig& config, std::uint64_t seed);

std::size_t param_count(const OrigiNet& model);

/// Parameter count from the configuration alone.
std::size_t param_count(const ModelConfig& config);

struct BlockCache {
  Tensor input;
  Tensor pre_small;  // conv outputs before activation
  Tensor pre_large;
  BatchNormCache bn;
};

struct ForwardCache {
  bool valid = false;
  Mode mode = Mode::Eval;
  std::uint64_t revision = 0;
  std::vector<BlockCache> blocks;
  Shape feature_shape;  // block output shape before flattening
  Tensor features;      // [N, feature_length]
  Tensor concat;        // [N, fc_width or 2 * fc_width]
  Tensor probs;
};

struct ForwardResult {
  Tensor probs;  // [N, Z]
  ForwardCache cache;
  /// Running statistics after this pass, one entry per block. The model is
  /// not modified; commit with apply_batchnorm_stats.
  std::vector<BatchNormStats> stats;
};

ForwardResult forward(const OrigiNet& model, const Tensor& batch, Mode mode);

void apply_batchnorm_stats(OrigiNet& model, std::span<const BatchNormStats> stats);

/// Gradients aligned with parameters(model).
struct ModelGrads {
  std::vector<Tensor> tensors;
};

struct BackwardResult {
  double loss = 0.0;
  ModelGrads grads;
};

/// Cross-entropy loss against `labels` and its gradient for every parameter.
BackwardResult backward(const OrigiNet& model, const ForwardCache& cache,
                        std::span<const std::size_t> labels);

/// Reverse pass seeded with an arbitrary gradient on the logits.
ModelGrads backward_from_logits(const OrigiNet& model, const ForwardCache& cache,
                                const Tensor& logits_grad);

/// Row-wise argmax.
std::vector<std::size_t> argmax_rows(const Tensor& probs);

/// One row per weight layer for inspection.
struct LayerSummary {
  std::string name;
  std::string kind;
  Shape output_shape;  // per-sample
  std::size_t params = 0;
};
std::vector<LayerSummary> summarize(const ModelConfig& config);

/// Number of weight layers as the architecture is usually counted: two
/// convolutions per block, one for the (possibly parallel) FC stage, and the
/// classifier.
std::size_t weight_layer_count(const ModelConfig& config);

}  // namespace originet
