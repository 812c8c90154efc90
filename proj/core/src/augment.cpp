#include "originet/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "originet/error.hpp"

namespace originet {

Image image_from_tensor(const Tensor& chw) {
  require_rank(chw, 3, "image tensor");
  Image img(chw.dim(0), chw.dim(1), chw.dim(2));
  std::copy(chw.data().begin(), chw.data().end(), img.pixels.begin());
  return img;
}

Tensor tensor_from_image(const Image& img) {
  return Tensor({img.channels, img.height, img.width}, img.pixels);
}

Image histogram_equalization(const Image& img) {
  if (img.channels != 1) {
    throw ArgumentError("histogram_equalization: expected a single-channel image, got " +
                        std::to_string(img.channels) + " channels");
  }
  if (img.pixels.empty()) throw ArgumentError("histogram_equalization: empty image");
  std::array<std::size_t, 256> hist{};
  std::vector<std::size_t> level(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = img.pixels[i];
    if (!std::isfinite(v)) throw NumericError("histogram_equalization: non-finite pixel");
    level[i] = static_cast<std::size_t>(std::clamp(std::lround(v), 0L, 255L));
    ++hist[level[i]];
  }
  std::array<double, 256> mapping{};
  std::size_t running = 0;
  const double total = static_cast<double>(img.pixels.size());
  for (std::size_t v = 0; v < 256; ++v) {
    running += hist[v];
    mapping[v] = std::round(255.0 * static_cast<double>(running) / total);
  }
  Image out = img;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = mapping[level[i]];
  return out;
}

Image rotate(const Image& img, double angle_degrees) {
  if (!(angle_degrees >= -45.0 && angle_degrees <= 45.0)) {
    throw ArgumentError("rotate: angle " + std::to_string(angle_degrees) + " outside [-45, 45]");
  }
  const double theta = angle_degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  const double max_x = static_cast<double>(img.width) - 1.0;
  const double max_y = static_cast<double>(img.height) - 1.0;

  Image out(img.channels, img.height, img.width);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      // Inverse map: with y pointing down, a counter-clockwise display
      // rotation by theta samples the source at R(theta) applied to (dx, dy).
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = cos_t * dx - sin_t * dy + cx;
      const double sy = sin_t * dx + cos_t * dy + cy;
      if (sx < 0.0 || sy < 0.0 || sx > max_x || sy > max_y) continue;
      const std::size_t x0 = static_cast<std::size_t>(sx);
      const std::size_t y0 = static_cast<std::size_t>(sy);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const std::size_t y1 = std::min(y0 + 1, img.height - 1);
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      for (std::size_t c = 0; c < img.channels; ++c) {
        const double top = img.at(c, y0, x0) * (1.0 - fx) + img.at(c, y0, x1) * fx;
        const double bottom = img.at(c, y1, x0) * (1.0 - fx) + img.at(c, y1, x1) * fx;
        out.at(c, y, x) = top * (1.0 - fy) + bottom * fy;
      }
    }
  }
  return out;
}

namespace {

// Equalizes each channel of a [0, 1] image on the 0..255 scale.
Image equalize_unit_image(const Image& img) {
  Image out = img;
  const std::size_t plane = img.plane_size();
  for (std::size_t c = 0; c < img.channels; ++c) {
    Image channel(1, img.height, img.width);
    for (std::size_t i = 0; i < plane; ++i) channel.pixels[i] = img.pixels[c * plane + i] * 255.0;
    const Image eq = histogram_equalization(channel);
    for (std::size_t i = 0; i < plane; ++i) out.pixels[c * plane + i] = eq.pixels[i] / 255.0;
  }
  return out;
}

}  // namespace

std::vector<Sample> augment(const Sample& sample, AugmentMode mode) {
  if (mode == AugmentMode::None) return {sample};
  const Image raw = image_from_tensor(sample.image);
  const Image equalized = equalize_unit_image(raw);
  std::vector<Sample> out;
  out.reserve(mode == AugmentMode::Product ? 14 : 7);
  for (double angle : kAugmentAngles) {
    if (mode == AugmentMode::Product) {
      Sample s = sample;
      s.image = tensor_from_image(rotate(raw, angle));
      s.tag = {angle, false};
      out.push_back(std::move(s));
    }
    Sample e = sample;
    e.image = tensor_from_image(rotate(equalized, angle));
    e.tag = {angle, true};
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace originet
