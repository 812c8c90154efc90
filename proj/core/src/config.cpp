#include "originet/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "originet/error.hpp"

namespace originet {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_size(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_channels == 0) throw ConfigError("input_channels must be at least 1");
  if (kernel_small % 2 == 0) throw ConfigError("kernel_small must be odd");
  if (kernel_large % 2 == 0) throw ConfigError("kernel_large must be odd");
  if (kernel_small >= kernel_large) throw ConfigError("kernel_small must be below kernel_large");
  if (block_depths.empty()) throw ConfigError("block_depths must not be empty");
  if (block_depths.size() >= 8 * sizeof(std::size_t)) throw ConfigError("block_depths too long");
  for (std::size_t i = 0; i < block_depths.size(); ++i) {
    if (block_depths[i] == 0) throw ConfigError("block_depths entries must be positive");
    if (i > 0 && block_depths[i] <= block_depths[i - 1]) {
      throw ConfigError("block_depths must be strictly increasing");
    }
  }
  const std::size_t factor = std::size_t{1} << block_depths.size();
  if (input_size == 0 || input_size % factor != 0) {
    throw ConfigError("input_size " + std::to_string(input_size) + " must be a positive multiple of " +
                      std::to_string(factor) + " (2^number of blocks)");
  }
  if (fc_width == 0) throw ConfigError("fc_width must be at least 1");
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  try {
    originet::validate(activation);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("activation: ") + e.what());
  }
}

void TrainHyper::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(target_train_acc >= 0.0 && target_train_acc <= 1.0)) {
    throw ConfigError("target_train_acc must be in [0, 1]");
  }
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

RunConfig run_config_from(const KeyValues& kv) {
  RunConfig cfg;
  ModelConfig& m = cfg.model;
  std::string activation_kind;
  bool alpha_set = false;
  double alpha = 0.0;
  for (const auto& [key, value] : kv) {
    if (key == "input_size") m.input_size = parse_size(key, value);
    else if (key == "input_channels") m.input_channels = parse_size(key, value);
    else if (key == "kernel_small") m.kernel_small = parse_size(key, value);
    else if (key == "kernel_large") m.kernel_large = parse_size(key, value);
    else if (key == "block_depths") m.block_depths = parse_size_list(key, value);
    else if (key == "fc_width") m.fc_width = parse_size(key, value);
    else if (key == "augmented") m.augmented = parse_bool(key, value);
    else if (key == "activation") activation_kind = value;
    else if (key == "activation_alpha") { alpha = parse_double(key, value); alpha_set = true; }
    else if (key == "num_classes") m.num_classes = parse_size(key, value);
    else if (key == "lr") cfg.train.lr = parse_double(key, value);
    else if (key == "momentum") cfg.train.momentum = parse_double(key, value);
    else if (key == "epochs") cfg.train.epochs = parse_size(key, value);
    else if (key == "batch_size") cfg.train.batch_size = parse_size(key, value);
    else if (key == "seed") cfg.train.seed = parse_size(key, value);
    else if (key == "target_train_acc") cfg.train.target_train_acc = parse_double(key, value);
    else if (key == "train_ratio") cfg.pipeline.train_ratio = parse_double(key, value);
    else if (key == "grayscale") cfg.pipeline.grayscale = parse_bool(key, value);
    else if (key == "abs_diff") cfg.pipeline.active.abs_diff = parse_bool(key, value);
    else if (key == "ft1_mode") {
      if (value == "zero") cfg.pipeline.active.ft1_mode = Ft1Mode::Zero;
      else if (value == "first_frame") cfg.pipeline.active.ft1_mode = Ft1Mode::FirstFrame;
      else throw ConfigError("config key 'ft1_mode': expected zero|first_frame, got '" + value + "'");
    } else if (key == "augment") {
      if (value == "product") cfg.pipeline.augment = AugmentMode::Product;
      else if (value == "single") cfg.pipeline.augment = AugmentMode::Single;
      else if (value == "none") cfg.pipeline.augment = AugmentMode::None;
      else throw ConfigError("config key 'augment': expected product|single|none, got '" + value + "'");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (!activation_kind.empty()) {
    try {
      m.activation = Activation::of(parse_activation_kind(activation_kind));
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }
  if (alpha_set) m.activation.alpha = alpha;
  if (!(cfg.pipeline.train_ratio > 0.0 && cfg.pipeline.train_ratio <= 1.0)) {
    throw ConfigError("train_ratio must be in (0, 1]");
  }
  m.validate();
  cfg.train.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return run_config_from(parse_key_values(buffer.str()));
}

std::string to_config_text(const ModelConfig& m) {
  std::ostringstream out;
  out << "input_size = " << m.input_size << '\n';
  out << "input_channels = " << m.input_channels << '\n';
  out << "kernel_small = " << m.kernel_small << '\n';
  out << "kernel_large = " << m.kernel_large << '\n';
  out << "block_depths = ";
  for (std::size_t i = 0; i < m.block_depths.size(); ++i) {
    out << (i ? "," : "") << m.block_depths[i];
  }
  out << '\n';
  out << "fc_width = " << m.fc_width << '\n';
  out << "augmented = " << (m.augmented ? "true" : "false") << '\n';
  out << "activation = " << activation_name(m.activation.kind) << '\n';
  out << "activation_alpha = " << format_double(m.activation.alpha) << '\n';
  out << "num_classes = " << m.num_classes << '\n';
  return out.str();
}

std::string augment_mode_name(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::Product: return "product";
    case AugmentMode::Single: return "single";
    case AugmentMode::None: return "none";
  }
  return "unknown";
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  out << to_config_text(c.model);
  out << "lr = " << format_double(c.train.lr) << '\n';
  out << "momentum = " << format_double(c.train.momentum) << '\n';
  out << "epochs = " << c.train.epochs << '\n';
  out << "batch_size = " << c.train.batch_size << '\n';
  out << "seed = " << c.train.seed << '\n';
  out << "target_train_acc = " << format_double(c.train.target_train_acc) << '\n';
  out << "train_ratio = " << format_double(c.pipeline.train_ratio) << '\n';
  out << "grayscale = " << (c.pipeline.grayscale ? "true" : "false") << '\n';
  out << "abs_diff = " << (c.pipeline.active.abs_diff ? "true" : "false") << '\n';
  out << "ft1_mode = " << (c.pipeline.active.ft1_mode == Ft1Mode::Zero ? "zero" : "first_frame") << '\n';
  out << "augment = " << augment_mode_name(c.pipeline.augment) << '\n';
  return out.str();
}

ModelConfig model_config_from_text(const std::string& text) {
  const KeyValues kv = parse_key_values(text);
  for (const auto& [key, value] : kv) {
    static const char* const kModelKeys[] = {"input_size",   "input_channels", "kernel_small",
                                             "kernel_large", "block_depths",   "fc_width",
                                             "augmented",    "activation",     "activation_alpha",
                                             "num_classes"};
    bool known = false;
    for (const char* k : kModelKeys) known = known || key == k;
    if (!known) throw ConfigError("model config: unexpected key '" + key + "'");
  }
  return run_config_from(kv).model;
}

}  // namespace originet
