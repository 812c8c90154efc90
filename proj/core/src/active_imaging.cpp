#include "originet/active_imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "originet/error.hpp"
#include "originet/image_io.hpp"

namespace originet {

void validate(const FrameSequence& seq) {
  if (seq.tau() < 2) {
    throw ArgumentError("frame sequence '" + seq.id + "' needs at least 2 frames, has " +
                        std::to_string(seq.tau()));
  }
  const Image& first = seq.frames.front();
  if (first.pixels.empty()) throw ArgumentError("frame sequence '" + seq.id + "' has empty frames");
  for (std::size_t i = 1; i < seq.tau(); ++i) {
    if (!seq.frames[i].same_geometry(first)) {
      throw ArgumentError("frame sequence '" + seq.id + "': frame " + std::to_string(i + 1) +
                          " differs in shape from frame 1");
    }
  }
}

namespace {

void check_frame_number(const FrameSequence& seq, std::size_t t, const char* what) {
  if (t < 2 || t > seq.tau()) {
    throw IndexError(std::string(what) + ": frame number " + std::to_string(t) +
                     " outside [2, " + std::to_string(seq.tau()) + "]");
  }
}

// Writes FT(t) into `out` (t is 1-based; t == 1 is the convention case).
void diff_into(const FrameSequence& seq, std::size_t t, const ActiveImageOptions& opts,
               std::vector<double>& out) {
  const std::vector<double>& cur = seq.frames[t - 1].pixels;
  out.resize(cur.size());
  if (t == 1) {
    if (opts.ft1_mode == Ft1Mode::Zero) {
      std::fill(out.begin(), out.end(), 0.0);
    } else {
      std::copy(cur.begin(), cur.end(), out.begin());
    }
    return;
  }
  const std::vector<double>& prev = seq.frames[t - 2].pixels;
  for (std::size_t p = 0; p < cur.size(); ++p) {
    const double d = cur[p] - prev[p];
    out[p] = opts.abs_diff ? std::abs(d) : d;
  }
}

}  // namespace

Image frame_diff(const FrameSequence& seq, std::size_t t, bool abs_diff) {
  validate(seq);
  check_frame_number(seq, t, "frame_diff");
  Image out(seq.frames.front().channels, seq.frames.front().height, seq.frames.front().width);
  ActiveImageOptions opts;
  opts.abs_diff = abs_diff;
  diff_into(seq, t, opts, out.pixels);
  return out;
}

Image pairwise_accum(const FrameSequence& seq, std::size_t t, const ActiveImageOptions& opts) {
  validate(seq);
  check_frame_number(seq, t, "pairwise_accum");
  Image out(seq.frames.front().channels, seq.frames.front().height, seq.frames.front().width);
  std::vector<double> before, now;
  diff_into(seq, t - 1, opts, before);
  diff_into(seq, t, opts, now);
  for (std::size_t p = 0; p < now.size(); ++p) out.pixels[p] = before[p] + now[p];
  return out;
}

ActiveImage active_image(const FrameSequence& seq, const ActiveImageOptions& opts) {
  validate(seq);
  const Image& first = seq.frames.front();
  ActiveImage result{Image(first.channels, first.height, first.width), false, seq.id};
  std::vector<double>& acc = result.pixels.pixels;

  // One pass over the frames, carrying FT(t-1) forward.
  std::vector<double> previous, current;
  diff_into(seq, 1, opts, previous);
  for (std::size_t t = 2; t <= seq.tau(); ++t) {
    diff_into(seq, t, opts, current);
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += previous[p] + current[p];
    std::swap(previous, current);
  }
  return result;
}

ActiveImage normalize_active(const ActiveImage& img) {
  const std::vector<double>& px = img.pixels.pixels;
  if (px.empty()) throw ArgumentError("normalize_active: empty image");
  double lo = px.front(), hi = px.front();
  for (double v : px) {
    if (!std::isfinite(v)) throw NumericError("normalize_active: non-finite pixel");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  ActiveImage out = img;
  out.normalized = true;
  if (hi == lo) {
    std::fill(out.pixels.pixels.begin(), out.pixels.pixels.end(), 128.0);
    return out;
  }
  const double range = hi - lo;
  for (double& v : out.pixels.pixels) v = (v - lo) / range * 255.0;
  return out;
}

std::vector<Image> load_video(const std::filesystem::path& source) {
  if (std::filesystem::is_directory(source)) {
    std::vector<Image> frames;
    for (const auto& file : list_frame_files(source)) frames.push_back(read_image(file));
    if (frames.empty()) throw IoError("no frame images in " + source.string());
    return frames;
  }
  if (!std::filesystem::exists(source)) throw IoError("video source not found: " + source.string());
  if (is_raw_video_file(source)) return read_raw_video(source);
  throw FormatError("unrecognized video source: " + source.string());
}

}  // namespace originet
