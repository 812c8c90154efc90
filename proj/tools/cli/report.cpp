#include "report.hpp"

namespace originet::cli {

Json config_echo(const RunConfig& config) {
  Json j = Json::object();
  for (const auto& [key, value] : parse_key_values(to_config_text(config))) j[key] = value;
  return j;
}

Json loso_report(const LosoResult& result, const RunConfig& config,
                 const std::vector<std::string>& label_names, bool shuffled_labels,
                 double total_ms) {
  Json j;
  j["command"] = "eval-loso";
  j["aggregation"] = "micro";  // pooled over test videos, not averaged over folds
  j["accuracy"] = result.micro_accuracy;
  j["mean_fold_accuracy"] = result.mean_fold_accuracy;
  j["shuffled_labels"] = shuffled_labels;
  j["label_names"] = label_names;

  Json folds = Json::array();
  for (const FoldOutcome& f : result.folds) {
    Json fj;
    fj["test_subject"] = f.test_subject;
    fj["accuracy"] = f.accuracy;
    fj["correct"] = f.correct;
    fj["test_samples"] = f.test_samples;
    fj["train_samples"] = f.train_samples;
    fj["val_samples"] = f.val_samples;
    fj["best_epoch"] = f.best_epoch;
    fj["best_val_acc"] = f.best_val_acc;
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  j["confusion"] = result.confusion;
  j["config"] = config_echo(config);

  Json timing;
  timing["total_ms"] = total_ms;
  Json fold_ms = Json::array();
  for (const FoldOutcome& f : result.folds) {
    double ms = 0.0;
    for (const EpochLog& e : f.log) ms += e.wall_ms;
    fold_ms.push_back(ms);
  }
  timing["fold_train_ms"] = std::move(fold_ms);
  j["timing"] = std::move(timing);
  return j;
}

std::string log_line(const EpochLog& entry, int fold, const std::string& test_subject) {
  Json j;
  if (fold >= 0) {
    j["fold"] = fold;
    j["test_subject"] = test_subject;
  }
  const Json fields = Json::parse(to_json_line(entry));
  for (const auto& [key, value] : fields.items()) j[key] = value;
  return j.dump();
}

}  // namespace originet::cli
