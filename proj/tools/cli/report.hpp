#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "originet/config.hpp"
#include "originet/loso.hpp"
#include "originet/trainer.hpp"

namespace originet::cli {

using Json = nlohmann::ordered_json;

/// Config keys and values as written by to_config_text.
Json config_echo(const RunConfig& config);

/// LOSO run report. Timings live under the final "timing" key so the rest of
/// the document is reproducible byte for byte.
Json loso_report(const LosoResult& result, const RunConfig& config,
                 const std::vector<std::string>& label_names, bool shuffled_labels,
                 double total_ms);

/// One JSON-lines record of a training epoch, optionally tagged with its fold.
std::string log_line(const EpochLog& entry, int fold = -1, const std::string& test_subject = {});

}  // namespace originet::cli
