#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "originet/config.hpp"
#include "originet/dataset.hpp"
#include "originet/sample.hpp"
#include "originet/trainer.hpp"

namespace originet {

/// Samples of one leave-one-subject-out fold. The train/validation split is
/// made per video before augmentation, and only the training part is
/// augmented.
struct FoldData {
  std::string test_subject;
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
};

/// `samples` must be aligned with manifest.entries (as materialize returns
/// them). An empty validation split falls back to the unaugmented training
/// videos.
FoldData prepare_fold(const DatasetManifest& manifest, const std::vector<Sample>& samples,
                      const LosoFold& fold, const PipelineOptions& opts, std::uint64_t seed);

/// Throws ProtocolError if any training or validation sample belongs to the
/// test subject, or any test sample does not.
void assert_no_leakage(const FoldData& fold);

struct FoldOutcome {
  std::string test_subject;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  std::size_t test_samples = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  std::vector<EpochLog> log;
};

struct LosoResult {
  std::vector<FoldOutcome> folds;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double micro_accuracy = 0.0;                      // pooled over all test videos
  double mean_fold_accuracy = 0.0;                  // unweighted mean of fold accuracies
};

/// Trains and tests one model per fold, in sorted subject order. Fold k uses
/// seed train.seed + k for its model, split and shuffles.
LosoResult evaluate_loso(const DatasetManifest& manifest, const RunConfig& config,
                         const std::function<void(std::size_t fold, const EpochLog&)>& on_epoch = {});

}  // namespace originet
