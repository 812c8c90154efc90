#include "originet/image.hpp"

#include <algorithm>
#include <cmath>

#include "originet/error.hpp"

namespace originet {

Image to_grayscale(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) {
    throw ArgumentError("to_grayscale: expected 1 or 3 channels, got " +
                        std::to_string(img.channels));
  }
  Image gray(1, img.height, img.width);
  const std::size_t plane = img.plane_size();
  for (std::size_t i = 0; i < plane; ++i) {
    gray.pixels[i] = 0.299 * img.pixels[i] + 0.587 * img.pixels[plane + i] +
                     0.114 * img.pixels[2 * plane + i];
  }
  return gray;
}

Image resize_bilinear(const Image& img, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw ArgumentError("resize_bilinear: zero target size");
  if (img.height == height && img.width == width) return img;
  Image out(img.channels, height, width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t y = 0; y < height; ++y) {
      const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0,
                                   static_cast<double>(img.height - 1));
      const std::size_t y0 = static_cast<std::size_t>(fy);
      const std::size_t y1 = std::min(y0 + 1, img.height - 1);
      const double wy = fy - static_cast<double>(y0);
      for (std::size_t x = 0; x < width; ++x) {
        const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0,
                                     static_cast<double>(img.width - 1));
        const std::size_t x0 = static_cast<std::size_t>(fx);
        const std::size_t x1 = std::min(x0 + 1, img.width - 1);
        const double wx = fx - static_cast<double>(x0);
        const double top = img.at(c, y0, x0) * (1.0 - wx) + img.at(c, y0, x1) * wx;
        const double bottom = img.at(c, y1, x0) * (1.0 - wx) + img.at(c, y1, x1) * wx;
        out.at(c, y, x) = top * (1.0 - wy) + bottom * wy;
      }
    }
  }
  return out;
}

}  // namespace originet
