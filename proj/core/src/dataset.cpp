#include "originet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "originet/error.hpp"
#include "originet/image_io.hpp"
#include "originet/random.hpp"

namespace fs = std::filesystem;

namespace originet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_index(const std::string& s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

std::vector<std::string> DatasetManifest::subjects() const {
  std::set<std::string> ids;
  for (const ManifestEntry& e : entries) ids.insert(e.subject_id);
  return {ids.begin(), ids.end()};
}

fs::path DatasetManifest::resolve(const ManifestEntry& e) const {
  return e.source.is_absolute() ? e.source : root / e.source;
}

void validate(const DatasetManifest& manifest) {
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& e = manifest.entries[i];
    if (e.label >= manifest.label_names.size()) {
      throw FormatError("manifest entry " + std::to_string(i + 1) + ": label index " +
                        std::to_string(e.label) + " has no class name");
    }
    if (!seen.emplace(e.subject_id, e.video_id).second) {
      throw FormatError("manifest entry " + std::to_string(i + 1) + ": duplicate (subject, video) (" +
                        e.subject_id + ", " + e.video_id + ")");
    }
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  DatasetManifest manifest;
  manifest.root = path.parent_path();

  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::vector<std::string> raw_labels;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != 4) {
      throw FormatError("manifest " + path.string() + " row " + std::to_string(row) +
                        ": expected 4 columns subject_id,video_id,path,label, got " +
                        std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (cells[k].empty()) {
        throw FormatError("manifest " + path.string() + " row " + std::to_string(row) +
                          ": empty column " + std::to_string(k + 1));
      }
    }
    ManifestEntry entry{cells[0], cells[1], fs::path(cells[2]), 0};
    if (!fs::exists(manifest.resolve(entry))) {
      throw IoError("manifest " + path.string() + " row " + std::to_string(row) +
                    ": source not found: " + manifest.resolve(entry).string());
    }
    manifest.entries.push_back(std::move(entry));
    raw_labels.push_back(cells[3]);
  }
  if (manifest.entries.empty()) throw FormatError("manifest " + path.string() + " has no entries");

  const bool numeric = std::all_of(raw_labels.begin(), raw_labels.end(), [](const std::string& s) {
    std::size_t v;
    return parse_index(s, v);
  });
  if (numeric) {
    std::size_t max_label = 0;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      parse_index(raw_labels[i], manifest.entries[i].label);
      max_label = std::max(max_label, manifest.entries[i].label);
    }
    for (std::size_t k = 0; k <= max_label; ++k) manifest.label_names.push_back(std::to_string(k));
  } else {
    std::set<std::string> names(raw_labels.begin(), raw_labels.end());
    manifest.label_names.assign(names.begin(), names.end());
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      manifest.entries[i].label = static_cast<std::size_t>(
          std::lower_bound(manifest.label_names.begin(), manifest.label_names.end(), raw_labels[i]) -
          manifest.label_names.begin());
    }
  }
  validate(manifest);
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "subject_id,video_id,path,label\n";
  for (const ManifestEntry& e : manifest.entries) {
    out << e.subject_id << ',' << e.video_id << ',' << e.source.generic_string() << ','
        << manifest.label_names.at(e.label) << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path.string());
}

std::vector<LosoFold> loso_splits(const DatasetManifest& manifest) {
  const std::vector<std::string> subjects = manifest.subjects();
  if (subjects.size() < 2) {
    throw ProtocolError("leave-one-subject-out needs at least 2 subjects, manifest has " +
                        std::to_string(subjects.size()));
  }
  std::vector<LosoFold> folds;
  for (const std::string& subject : subjects) {
    LosoFold fold;
    fold.test_subject = subject;
    for (const ManifestEntry& e : manifest.entries) {
      (e.subject_id == subject ? fold.test : fold.train).push_back(e);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> train_val_split(
    std::vector<ManifestEntry> entries, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ArgumentError("train_val_split: ratio outside [0, 1]");
  Rng rng(seed);
  rng.shuffle(entries);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(entries.size())));
  std::vector<ManifestEntry> val(entries.begin() + static_cast<std::ptrdiff_t>(n_train), entries.end());
  entries.resize(n_train);
  return {std::move(entries), std::move(val)};
}

DatasetManifest shuffle_labels(DatasetManifest manifest, std::uint64_t seed) {
  std::vector<std::size_t> labels;
  for (const ManifestEntry& e : manifest.entries) labels.push_back(e.label);
  Rng rng(seed);
  rng.shuffle(labels);
  for (std::size_t i = 0; i < labels.size(); ++i) manifest.entries[i].label = labels[i];
  return manifest;
}

FrameSequence load_sequence(const DatasetManifest& manifest, const ManifestEntry& entry) {
  FrameSequence seq;
  seq.frames = load_video(manifest.resolve(entry));
  seq.id = entry.subject_id + "/" + entry.video_id;
  seq.subject_id = entry.subject_id;
  seq.label = entry.label;
  return seq;
}

Sample make_sample(const FrameSequence& seq, const ModelConfig& model, const PipelineOptions& opts) {
  FrameSequence prepared = seq;
  if (opts.grayscale) {
    for (Image& f : prepared.frames) f = to_grayscale(f);
  }
  const ActiveImage active = normalize_active(active_image(prepared, opts.active));
  Image img = resize_bilinear(active.pixels, model.input_size, model.input_size);
  if (img.channels != model.input_channels) {
    throw DimensionError("video '" + seq.id + "' yields " + std::to_string(img.channels) +
                         " channels but the model expects " + std::to_string(model.input_channels));
  }
  for (double& p : img.pixels) p = std::clamp(p / 255.0, 0.0, 1.0);
  Sample s;
  s.image = Tensor({img.channels, img.height, img.width}, std::move(img.pixels));
  s.label = seq.label;
  s.subject_id = seq.subject_id;
  const auto slash = seq.id.find('/');
  s.video_id = slash == std::string::npos ? seq.id : seq.id.substr(slash + 1);
  return s;
}

std::vector<Sample> materialize(const DatasetManifest& manifest,
                                const std::vector<ManifestEntry>& entries,
                                const ModelConfig& model, const PipelineOptions& opts) {
  std::vector<Sample> out;
  out.reserve(entries.size());
  for (const ManifestEntry& e : entries) out.push_back(make_sample(load_sequence(manifest, e), model, opts));
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic micro-motion videos
// ---------------------------------------------------------------------------

namespace {

struct Region {
  double cx, cy;  // fractions of the frame size
  double dx, dy;  // drift direction
};

// Eye, eye, mouth, brow, then further points around the face for Z > 4.
Region class_region(std::size_t cls) {
  static const Region kRegions[] = {
      {0.30, 0.35, 1.0, 0.0},  {0.70, 0.35, -1.0, 0.0}, {0.50, 0.75, 0.0, 1.0},
      {0.50, 0.18, 0.0, -1.0}, {0.22, 0.70, 0.7, 0.7},  {0.78, 0.70, -0.7, 0.7},
  };
  if (cls < std::size(kRegions)) return kRegions[cls];
  const double a = 2.0 * 3.14159265358979323846 * static_cast<double>(cls) / 11.0;
  return {0.5 + 0.3 * std::cos(a), 0.5 + 0.3 * std::sin(a), -std::sin(a), std::cos(a)};
}

Image subject_texture(std::size_t size, Rng& rng) {
  Image base(1, size, size, 0.0);
  const double s = static_cast<double>(size);
  const double level = rng.uniform(90.0, 130.0);
  const double gx = rng.uniform(-20.0, 20.0), gy = rng.uniform(-20.0, 20.0);
  struct Bump { double x, y, sigma, amp; };
  std::vector<Bump> bumps;
  for (int k = 0; k < 6; ++k) {
    bumps.push_back({rng.uniform(0.0, s), rng.uniform(0.0, s), rng.uniform(0.08, 0.25) * s,
                     rng.uniform(-35.0, 35.0)});
  }
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double fx = static_cast<double>(x), fy = static_cast<double>(y);
      double v = level + gx * (fx / s - 0.5) + gy * (fy / s - 0.5);
      for (const Bump& b : bumps) {
        const double r2 = (fx - b.x) * (fx - b.x) + (fy - b.y) * (fy - b.y);
        v += b.amp * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
      }
      base.at(0, y, x) = v;
    }
  }
  return base;
}

}  // namespace

std::vector<SynthVideo> synth_videos(const SynthSpec& spec) {
  if (spec.num_subjects == 0 || spec.videos_per_subject == 0 || spec.num_classes < 2 ||
      spec.frames < 2 || spec.size < 8) {
    throw ArgumentError("synth_dataset: need subjects >= 1, videos >= 1, classes >= 2, frames >= 2, size >= 8");
  }
  Rng rng(spec.seed);
  const double s = static_cast<double>(spec.size);
  std::vector<SynthVideo> videos;
  for (std::size_t subj = 0; subj < spec.num_subjects; ++subj) {
    const Image base = subject_texture(spec.size, rng);
    // Small per-subject face offset.
    const double off_x = rng.uniform(-0.03, 0.03) * s, off_y = rng.uniform(-0.03, 0.03) * s;
    char subject_id[32];
    std::snprintf(subject_id, sizeof subject_id, "sub%02zu", subj + 1);
    for (std::size_t v = 0; v < spec.videos_per_subject; ++v) {
      const std::size_t cls = (subj + v) % spec.num_classes;
      const Region region = class_region(cls);
      const double sigma = s * rng.uniform(0.055, 0.075);
      const double amplitude = rng.uniform(35.0, 60.0);
      const double drift = s * rng.uniform(0.04, 0.07);
      const double cx = region.cx * s + off_x + rng.uniform(-0.02, 0.02) * s;
      const double cy = region.cy * s + off_y + rng.uniform(-0.02, 0.02) * s;
      const double support = 3.0 * sigma;

      SynthVideo video;
      char video_id[32];
      std::snprintf(video_id, sizeof video_id, "v%02zu", v + 1);
      video.entry = {subject_id, video_id, fs::path(subject_id) / video_id, cls};
      for (std::size_t t = 0; t < spec.frames; ++t) {
        const double phase = static_cast<double>(t) / static_cast<double>(spec.frames - 1);
        const double bx = cx + region.dx * drift * phase;
        const double by = cy + region.dy * drift * phase;
        Image frame = base;
        for (std::size_t y = 0; y < spec.size; ++y) {
          for (std::size_t x = 0; x < spec.size; ++x) {
            const double ddx = static_cast<double>(x) - bx, ddy = static_cast<double>(y) - by;
            const double r2 = ddx * ddx + ddy * ddy;
            if (r2 <= support * support) frame.at(0, y, x) += amplitude * phase * std::exp(-r2 / (2.0 * sigma * sigma));
          }
        }
        for (double& p : frame.pixels) p = std::clamp(std::round(p), 0.0, 255.0);
        video.frames.push_back(std::move(frame));
      }
      videos.push_back(std::move(video));
    }
  }
  return videos;
}

DatasetManifest synth_dataset(const SynthSpec& spec, const fs::path& dir) {
  std::vector<SynthVideo> videos = synth_videos(spec);
  fs::create_directories(dir);
  DatasetManifest manifest;
  manifest.root = dir;
  for (std::size_t k = 0; k < spec.num_classes; ++k) manifest.label_names.push_back(std::to_string(k));
  for (SynthVideo& video : videos) {
    const fs::path video_dir = dir / video.entry.source;
    fs::create_directories(video_dir);
    for (std::size_t t = 0; t < video.frames.size(); ++t) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%03zu.pgm", t + 1);
      write_image(video_dir / name, video.frames[t]);
    }
    manifest.entries.push_back(video.entry);
  }
  write_manifest(manifest, dir / "manifest.csv");
  return manifest;
}

}  // namespace originet
