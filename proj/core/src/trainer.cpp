#include "originet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "originet/error.hpp"
#include "originet/random.hpp"

namespace originet {

std::string to_json_line(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["train_acc"] = e.train_acc;
  j["val_acc"] = e.val_acc;
  j["wall_ms"] = e.wall_ms;
  return j.dump();
}

Tensor stack_images(std::span<const Sample> samples, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ArgumentError("stack_images: empty batch");
  const Tensor& first = samples[indices.front()].image;
  require_rank(first, 3, "sample image");
  Tensor batch({indices.size(), first.dim(0), first.dim(1), first.dim(2)});
  const std::size_t per = first.size();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Tensor& img = samples[indices[i]].image;
    require_same_shape(img, first, "stack_images");
    std::copy(img.data().begin(), img.data().end(), batch.data().begin() + i * per);
  }
  return batch;
}

std::vector<std::size_t> predict(const OrigiNet& model, std::span<const Sample> samples,
                                 std::size_t batch_size) {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    idx.resize(std::min(batch_size, samples.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const ForwardResult fr = forward(model, stack_images(samples, idx), Mode::Eval);
    for (std::size_t k : argmax_rows(fr.probs)) out.push_back(k);
  }
  return out;
}

double accuracy(const OrigiNet& model, std::span<const Sample> samples, std::size_t batch_size) {
  if (samples.empty()) throw ArgumentError("accuracy: empty sample set");
  const std::vector<std::size_t> pred = predict(model, samples, batch_size);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == samples[i].label;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train(OrigiNet model, std::span<const Sample> train_set,
                  std::span<const Sample> val_set, const TrainHyper& hyper,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  if (train_set.empty()) throw ArgumentError("train: empty training set");
  if (val_set.empty()) throw ArgumentError("train: empty validation set");
  hyper.validate();
  for (const Sample& s : train_set) {
    if (s.label >= model.config.num_classes) {
      throw ArgumentError("train: label " + std::to_string(s.label) + " outside model classes");
    }
  }

  Rng rng(hyper.seed);
  SgdState sgd;
  TrainResult result;
  result.best_val_acc = -1.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> labels;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t count = std::min(hyper.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      labels.clear();
      for (std::size_t i : idx) labels.push_back(train_set[i].label);

      ForwardResult fr;
      BackwardResult br;
      try {
        fr = forward(model, stack_images(train_set, idx), Mode::Train);
        br = backward(model, fr.cache, labels);
      } catch (const NumericError& e) {
        throw NumericError("train: diverged in epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(br.loss)) {
        throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch));
      }
      loss_sum += br.loss * static_cast<double>(count);
      const std::vector<std::size_t> pred = argmax_rows(fr.probs);
      for (std::size_t i = 0; i < count; ++i) correct += pred[i] == labels[i];

      apply_batchnorm_stats(model, fr.stats);
      std::vector<Tensor*> params;
      for (NamedParam& p : parameters(model)) params.push_back(p.tensor);
      sgd = sgd_step(params, br.grads.tensors, hyper.lr, hyper.momentum, std::move(sgd));
      ++model.revision;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(train_set.size());
    entry.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    try {
      entry.val_acc = accuracy(model, val_set, hyper.batch_size);
    } catch (const NumericError& e) {
      throw NumericError("train: diverged in epoch " + std::to_string(epoch) + ": " + e.what());
    }
    entry.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (entry.val_acc > result.best_val_acc) {
      result.best_val_acc = entry.val_acc;
      result.best_epoch = epoch;
      result.best_model = model;
    }
    if (hyper.target_train_acc > 0.0 && entry.train_acc >= hyper.target_train_acc) break;
  }
  return result;
}

}  // namespace originet
