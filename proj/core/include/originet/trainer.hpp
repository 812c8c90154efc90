#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "originet/config.hpp"
#include "originet/originet.hpp"
#include "originet/sample.hpp"

namespace originet {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double wall_ms = 0.0;
};

/// {"epoch":..,"train_loss":..,"train_acc":..,"val_acc":..,"wall_ms":..}
std::string to_json_line(const EpochLog& entry);

struct TrainResult {
  OrigiNet best_model;  // parameters from the epoch with the highest val accuracy
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  std::vector<EpochLog> log;
};

/// Stacks sample images into an [N, C, H, W] batch.
Tensor stack_images(std::span<const Sample> samples, std::span<const std::size_t> indices);

/// Seeded mini-batch SGD over `train_set`. Train accuracy and loss are taken
/// from the train-mode passes of each epoch; validation accuracy uses eval
/// mode. Throws NumericError naming the epoch if the loss stops being finite.
TrainResult train(OrigiNet model, std::span<const Sample> train_set,
                  std::span<const Sample> val_set, const TrainHyper& hyper,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Eval-mode class predictions.
std::vector<std::size_t> predict(const OrigiNet& model, std::span<const Sample> samples,
                                 std::size_t batch_size = 32);

double accuracy(const OrigiNet& model, std::span<const Sample> samples,
                std::size_t batch_size = 32);

}  // namespace originet
