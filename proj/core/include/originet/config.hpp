#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "originet/active_imaging.hpp"
#include "originet/activations.hpp"

namespace originet {

/// Architecture hyperparameters. Defaults give the reference network:
/// 128x128x1 input, 3x3/5x5 branch pair, depths 16/32/64/96, two parallel
/// 128-unit FC layers, RReLU(0.1), four classes.
struct ModelConfig {
  std::size_t input_size = 128;
  std::size_t input_channels = 1;
  std::size_t kernel_small = 3;
  std::size_t kernel_large = 5;
  std::vector<std::size_t> block_depths{16, 32, 64, 96};
  std::size_t fc_width = 128;
  bool augmented = true;  // false: one FC layer instead of two in parallel
  Activation activation = Activation::rrelu(0.1);
  std::size_t num_classes = 4;

  /// Throws ConfigError naming the first violated field.
  void validate() const;

  std::size_t final_spatial() const { return input_size >> block_depths.size(); }
  std::size_t feature_length() const {
    return block_depths.back() * final_spatial() * final_spatial();
  }

  bool operator==(const ModelConfig&) const = default;
};

struct TrainHyper {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Stop once an epoch's training accuracy reaches this value (0 disables).
  double target_train_acc = 0.0;

  void validate() const;
  bool operator==(const TrainHyper&) const = default;
};

/// How each training active image is augmented.
enum class AugmentMode {
  Product,  // 7 rotations x {raw, equalized} = 14 samples
  Single,   // 7 rotations, equalized = 7 samples
  None,
};

struct PipelineOptions {
  ActiveImageOptions active;
  bool grayscale = true;
  AugmentMode augment = AugmentMode::Product;
  double train_ratio = 0.8;

  bool operator==(const PipelineOptions& o) const {
    return active.ft1_mode == o.active.ft1_mode && active.abs_diff == o.active.abs_diff &&
           grayscale == o.grayscale && augment == o.augment && train_ratio == o.train_ratio;
  }
};

/// Everything a run needs, as read from a `key = value` config file.
struct RunConfig {
  ModelConfig model;
  TrainHyper train;
  PipelineOptions pipeline;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// duplicate keys and malformed lines raise ConfigError with the line number.
KeyValues parse_key_values(const std::string& text);

/// Applies recognized keys over defaults. Unknown keys raise ConfigError.
RunConfig run_config_from(const KeyValues& kv);
RunConfig load_run_config(const std::filesystem::path& path);

/// Model keys only, one per line, in a fixed order.
std::string to_config_text(const ModelConfig& config);
std::string to_config_text(const RunConfig& config);
ModelConfig model_config_from_text(const std::string& text);

std::string augment_mode_name(AugmentMode mode);

}  // namespace originet
