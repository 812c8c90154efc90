#include "originet/loso.hpp"

#include <map>
#include <utility>

#include "originet/augment.hpp"
#include "originet/error.hpp"

namespace originet {

namespace {

using VideoKey = std::pair<std::string, std::string>;

std::vector<Sample> pick(const std::map<VideoKey, const Sample*>& index,
                         const std::vector<ManifestEntry>& entries) {
  std::vector<Sample> out;
  out.reserve(entries.size());
  for (const ManifestEntry& e : entries) {
    const auto it = index.find({e.subject_id, e.video_id});
    if (it == index.end()) {
      throw ArgumentError("prepare_fold: no sample for " + e.subject_id + "/" + e.video_id);
    }
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace

FoldData prepare_fold(const DatasetManifest& manifest, const std::vector<Sample>& samples,
                      const LosoFold& fold, const PipelineOptions& opts, std::uint64_t seed) {
  if (samples.size() != manifest.entries.size()) {
    throw ArgumentError("prepare_fold: " + std::to_string(samples.size()) + " samples for " +
                        std::to_string(manifest.entries.size()) + " manifest entries");
  }
  std::map<VideoKey, const Sample*> index;
  for (const Sample& s : samples) index[{s.subject_id, s.video_id}] = &s;

  auto [train_entries, val_entries] = train_val_split(fold.train, opts.train_ratio, seed);
  FoldData data;
  data.test_subject = fold.test_subject;
  const std::vector<Sample> train_raw = pick(index, train_entries);
  data.val = pick(index, val_entries.empty() ? train_entries : val_entries);
  data.test = pick(index, fold.test);
  for (const Sample& s : train_raw) {
    for (Sample& a : augment(s, opts.augment)) data.train.push_back(std::move(a));
  }
  return data;
}

void assert_no_leakage(const FoldData& fold) {
  for (const auto* set : {&fold.train, &fold.val}) {
    for (const Sample& s : *set) {
      if (s.subject_id == fold.test_subject) {
        throw ProtocolError("fold " + fold.test_subject + ": sample " + s.subject_id + "/" +
                            s.video_id + " of the test subject is in the training data");
      }
    }
  }
  for (const Sample& s : fold.test) {
    if (s.subject_id != fold.test_subject) {
      throw ProtocolError("fold " + fold.test_subject + ": test sample from subject " + s.subject_id);
    }
  }
}

LosoResult evaluate_loso(const DatasetManifest& manifest, const RunConfig& config,
                         const std::function<void(std::size_t, const EpochLog&)>& on_epoch) {
  config.model.validate();
  config.train.validate();
  validate(manifest);
  if (manifest.label_names.size() > config.model.num_classes) {
    throw ConfigError("num_classes " + std::to_string(config.model.num_classes) + " is below the " +
                      std::to_string(manifest.label_names.size()) + " dataset labels");
  }
  const std::vector<LosoFold> folds = loso_splits(manifest);
  const std::vector<Sample> samples =
      materialize(manifest, manifest.entries, config.model, config.pipeline);

  const std::size_t z = config.model.num_classes;
  LosoResult result;
  result.confusion.assign(z, std::vector<std::size_t>(z, 0));
  std::size_t pooled_correct = 0, pooled_total = 0;
  double fold_acc_sum = 0.0;

  for (std::size_t k = 0; k < folds.size(); ++k) {
    const std::uint64_t seed = config.train.seed + k;
    const FoldData data = prepare_fold(manifest, samples, folds[k], config.pipeline, seed);
    assert_no_leakage(data);

    TrainHyper hyper = config.train;
    hyper.seed = seed;
    std::function<void(const EpochLog&)> relay;
    if (on_epoch) relay = [&](const EpochLog& e) { on_epoch(k, e); };
    const TrainResult trained = train(build(config.model, seed), data.train, data.val, hyper, relay);

    const std::vector<std::size_t> pred = predict(trained.best_model, data.test, hyper.batch_size);
    FoldOutcome out;
    out.test_subject = data.test_subject;
    out.train_samples = data.train.size();
    out.val_samples = data.val.size();
    out.test_samples = data.test.size();
    for (std::size_t i = 0; i < pred.size(); ++i) {
      out.correct += pred[i] == data.test[i].label;
      result.confusion[data.test[i].label][pred[i]] += 1;
    }
    out.accuracy = static_cast<double>(out.correct) / static_cast<double>(out.test_samples);
    out.best_epoch = trained.best_epoch;
    out.best_val_acc = trained.best_val_acc;
    out.log = trained.log;

    pooled_correct += out.correct;
    pooled_total += out.test_samples;
    fold_acc_sum += out.accuracy;
    result.folds.push_back(std::move(out));
  }
  result.micro_accuracy = static_cast<double>(pooled_correct) / static_cast<double>(pooled_total);
  result.mean_fold_accuracy = fold_acc_sum / static_cast<double>(folds.size());
  return result;
}

}  // namespace originet
