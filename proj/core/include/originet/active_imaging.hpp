#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "originet/image.hpp"

namespace originet {

/// Frames of one video, oldest first, plus dataset metadata.
struct FrameSequence {
  std::vector<Image> frames;
  std::string id;
  std::string subject_id;
  std::size_t label = 0;

  std::size_t tau() const { return frames.size(); }
};

/// Throws ArgumentError unless there are at least two frames of one geometry.
void validate(const FrameSequence& seq);

struct ActiveImage {
  Image pixels;
  bool normalized = false;
  std::string source_id;
};

// What FT(1) means. The difference operator is only defined from frame 2 on,
// but E(2) = FT(1) + FT(2) needs it. Zero makes the sum telescope to
// F_tau + F_{tau-1} - 2 F_1; FirstFrame injects F_1 as appearance content.
enum class Ft1Mode { Zero, FirstFrame };

struct ActiveImageOptions {
  Ft1Mode ft1_mode = Ft1Mode::Zero;
  bool abs_diff = false;  // |F_t - F_{t-1}| instead of the signed difference
};

// Frame numbers below are 1-based, t in [2, tau], as in the defining sums.

/// FT(t) = F_t - F_{t-1}.
Image frame_diff(const FrameSequence& seq, std::size_t t, bool abs_diff = false);

/// E(t) = FT(t-1) + FT(t).
Image pairwise_accum(const FrameSequence& seq, std::size_t t, const ActiveImageOptions& opts = {});

/// A = sum_{t=2}^{tau} E(t), accumulated frame by frame. Per channel; output
/// has the frame geometry and is not normalized.
ActiveImage active_image(const FrameSequence& seq, const ActiveImageOptions& opts = {});

/// Min-max rescale to [0, 255], jointly over channels. A constant image maps
/// to 128 everywhere.
ActiveImage normalize_active(const ActiveImage& img);

/// Reads a video from a directory of frame images or a raw video file.
std::vector<Image> load_video(const std::filesystem::path& source);

}  // namespace originet
