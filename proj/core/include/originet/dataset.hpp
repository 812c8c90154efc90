#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "originet/active_imaging.hpp"
#include "originet/config.hpp"
#include "originet/sample.hpp"

namespace originet {

struct ManifestEntry {
  std::string subject_id;
  std::string video_id;
  std::filesystem::path source;  // frame directory or raw video, absolute or root-relative
  std::size_t label = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> label_names;
  std::filesystem::path root;

  std::vector<std::string> subjects() const;  // sorted, distinct
  std::filesystem::path resolve(const ManifestEntry& e) const;
};

/// Checks label range and (subject, video) uniqueness. The two-subject
/// requirement is left to loso_splits.
void validate(const DatasetManifest& manifest);

/// Reads `subject_id,video_id,path,label` rows after one header line.
/// Labels are either all integers (used as indices) or class names (indexed
/// in sorted order). Relative paths resolve against the manifest directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct LosoFold {
  std::string test_subject;
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> test;
};

/// One fold per subject, in sorted subject order. Throws ProtocolError with
/// fewer than two subjects.
std::vector<LosoFold> loso_splits(const DatasetManifest& manifest);

/// Seeded shuffle, then the first round(ratio * n) entries train.
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> train_val_split(
    std::vector<ManifestEntry> entries, double ratio, std::uint64_t seed);

/// Same entries with labels permuted by a seeded shuffle (class balance kept).
DatasetManifest shuffle_labels(DatasetManifest manifest, std::uint64_t seed);

/// Active image of one video as a network input: grayscale (if requested),
/// active image, min-max to [0, 255], resize to the model input, scale to [0, 1].
Sample make_sample(const FrameSequence& seq, const ModelConfig& model, const PipelineOptions& opts);

/// Loads and converts every entry, in order.
std::vector<Sample> materialize(const DatasetManifest& manifest,
                                const std::vector<ManifestEntry>& entries,
                                const ModelConfig& model, const PipelineOptions& opts);

FrameSequence load_sequence(const DatasetManifest& manifest, const ManifestEntry& entry);

struct SynthSpec {
  std::size_t num_subjects = 8;
  std::size_t videos_per_subject = 6;
  std::size_t num_classes = 4;
  std::size_t frames = 10;
  std::size_t size = 32;
  std::uint64_t seed = 0;
};

struct SynthVideo {
  ManifestEntry entry;
  std::vector<Image> frames;  // integer-valued gray levels 0..255
};

/// Per-subject static texture with a class-specific localized blob that
/// drifts and brightens over the video. Pixels outside the blob's support
/// are identical in every frame. Class of video v of subject s is (s + v) mod Z.
std::vector<SynthVideo> synth_videos(const SynthSpec& spec);

/// Writes `<subject>/<video>/frame_NNN.pgm` plus manifest.csv under `dir`
/// and returns the manifest as load_manifest would read it.
DatasetManifest synth_dataset(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace originet
