#include "originet/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "originet/error.hpp"

namespace originet {

namespace {

constexpr char kMagic[4] = {'O', 'G', 'N', 'W'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) bytes_.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) bytes_.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
  }
  void text(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  void tensor_values(const Tensor& t) {
    for (double v : t.data()) f64(v);
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string source) : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = v << 8 | static_cast<unsigned char>(bytes_[pos_ + k]);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = bits << 8 | static_cast<unsigned char>(bytes_[pos_ + k]);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::string text(std::size_t limit) {
    const std::uint32_t n = u32();
    if (n > limit) fail("string length " + std::to_string(n) + " exceeds limit");
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void expect_magic() {
    need(4);
    if (std::memcmp(bytes_.data(), kMagic, 4) != 0) fail("bad magic bytes");
    pos_ += 4;
  }
  void read_values(Tensor& t) {
    need(8 * t.size());
    for (double& v : t.data()) v = f64();
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("weight file " + source_ + ": " + why + " (offset " + std::to_string(pos_) + ")");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated");
  }
  std::vector<char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_weights(const OrigiNet& model, const std::filesystem::path& path) {
  if (path.empty()) throw IoError("save_weights: empty path");
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kWeightFormatVersion);
  w.text(to_config_text(model.config));
  const auto params = parameters(model);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const ConstNamedParam& p : params) {
    w.text(p.name);
    w.u32(static_cast<std::uint32_t>(p.tensor->rank()));
    for (std::size_t d : p.tensor->shape()) w.u32(static_cast<std::uint32_t>(d));
    w.tensor_values(*p.tensor);
  }
  w.u32(static_cast<std::uint32_t>(model.blocks.size()));
  for (const HybridBlock& b : model.blocks) {
    w.u32(b.stats.populated ? 1 : 0);
    if (b.stats.populated) {
      w.tensor_values(b.stats.running_mean);
      w.tensor_values(b.stats.running_var);
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("failed writing " + path.string());
}

OrigiNet load_weights(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  if (path.empty()) throw IoError("load_weights: empty path");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weight file " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path.string());

  r.expect_magic();
  const std::uint32_t version = r.u32();
  if (version != kWeightFormatVersion) r.fail("unsupported format version " + std::to_string(version));

  ModelConfig config;
  try {
    config = model_config_from_text(r.text(1 << 16));
  } catch (const ConfigError& e) {
    r.fail(std::string("embedded config invalid: ") + e.what());
  }
  if (expected && !(*expected == config)) {
    throw ConfigError("weight file " + path.string() + " was saved with a different model config:\n" +
                      to_config_text(config));
  }

  OrigiNet model = build(config, 0);
  auto params = parameters(model);
  const std::uint32_t count = r.u32();
  if (count != params.size()) {
    r.fail("expected " + std::to_string(params.size()) + " tensors, found " + std::to_string(count));
  }
  for (NamedParam& p : params) {
    const std::string name = r.text(256);
    if (name != p.name) r.fail("expected tensor '" + p.name + "', found '" + name + "'");
    const std::uint32_t rank = r.u32();
    Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    if (shape != p.tensor->shape()) {
      r.fail("tensor '" + name + "' has shape " + shape_string(shape) + ", expected " +
             shape_string(p.tensor->shape()));
    }
    r.read_values(*p.tensor);
  }
  const std::uint32_t blocks = r.u32();
  if (blocks != model.blocks.size()) r.fail("block count mismatch");
  for (HybridBlock& b : model.blocks) {
    const std::uint32_t populated = r.u32();
    if (populated > 1) r.fail("bad running-stats flag");
    if (populated == 1) {
      b.stats.running_mean = Tensor(b.gamma.shape());
      b.stats.running_var = Tensor(b.gamma.shape());
      r.read_values(b.stats.running_mean);
      r.read_values(b.stats.running_var);
      b.stats.populated = true;
    }
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return model;
}

}  // namespace originet
