#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace originet {

/// Planar (channel-major, then row-major) double image.
struct Image {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
      : channels(channels), height(height), width(width), pixels(channels * height * width, fill) {}

  std::size_t plane_size() const { return height * width; }
  bool same_geometry(const Image& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return pixels[(c * height + y) * width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels[(c * height + y) * width + x];
  }

  bool operator==(const Image&) const = default;
};

/// ITU-R BT.601 luma (0.299 R + 0.587 G + 0.114 B). Single-channel input is
/// returned unchanged.
Image to_grayscale(const Image& img);

/// Bilinear resize (pixel-center aligned) to height x width.
Image resize_bilinear(const Image& img, std::size_t height, std::size_t width);

}  // namespace originet
