#include "oracles.hpp"

namespace originet::oracle {

Tensor conv2d_direct(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                     std::size_t stride, std::size_t pad_top, std::size_t pad_bottom,
                     std::size_t pad_left, std::size_t pad_right) {
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t d = kernel.dim(0), ky = kernel.dim(2), kx = kernel.dim(3);
  const long S = static_cast<long>(stride);
  const std::size_t oh = (h + pad_top + pad_bottom - ky) / stride + 1;
  const std::size_t ow = (w + pad_left + pad_right - kx) / stride + 1;

  // Zero-padded copy, 1-based coordinates into it.
  const std::size_t ph = h + pad_top + pad_bottom, pw = w + pad_left + pad_right;
  auto padded = [&](std::size_t b, std::size_t ch, long r, long col) -> double {
    const long y = r - 1 - static_cast<long>(pad_top);
    const long x = col - 1 - static_cast<long>(pad_left);
    if (r < 1 || col < 1 || r > static_cast<long>(ph) || col > static_cast<long>(pw)) return 0.0;
    if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) return 0.0;
    return input.at(b, ch, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  };

  Tensor out({n, d, oh, ow});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t f = 0; f < d; ++f) {
      for (long l = 1; l <= static_cast<long>(oh); ++l) {
        for (long m = 1; m <= static_cast<long>(ow); ++m) {
          const long alpha = S * l - (S - 1);
          const long beta = S * m - (S - 1);
          double acc = bias[f];
          for (std::size_t ch = 0; ch < c; ++ch)
            for (long i = 0; i < static_cast<long>(ky); ++i)
              for (long j = 0; j < static_cast<long>(kx); ++j)
                acc += kernel.at(f, ch, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                       padded(b, ch, alpha + i, beta + j);
          out.at(b, f, static_cast<std::size_t>(l - 1), static_cast<std::size_t>(m - 1)) = acc;
        }
      }
    }
  }
  return out;
}

Image active_image_direct(const FrameSequence& seq) {
  const Image& first = seq.frames.front();
  Image out(first.channels, first.height, first.width);
  const std::size_t tau = seq.frames.size();
  for (std::size_t p = 0; p < first.pixels.size(); ++p) {
    double acc = 0.0;
    for (std::size_t t = 2; t <= tau; ++t) {
      double ft_prev;
      if (t - 1 == 1) {
        ft_prev = 0.0;
      } else {
        ft_prev = seq.frames[t - 2].pixels[p] - seq.frames[t - 3].pixels[p];
      }
      const double ft = seq.frames[t - 1].pixels[p] - seq.frames[t - 2].pixels[p];
      acc += ft_prev + ft;
    }
    out.pixels[p] = acc;
  }
  return out;
}

Image active_image_closed_form(const FrameSequence& seq) {
  const std::size_t tau = seq.frames.size();
  const Image& last = seq.frames[tau - 1];
  const Image& before = seq.frames[tau - 2];
  const Image& first = seq.frames[0];
  Image out(first.channels, first.height, first.width);
  for (std::size_t p = 0; p < out.pixels.size(); ++p) {
    out.pixels[p] = last.pixels[p] + before.pixels[p] - 2.0 * first.pixels[p];
  }
  return out;
}

std::size_t param_count_arithmetic(const ModelConfig& cfg) {
  std::size_t total = 0;
  std::size_t in_ch = cfg.input_channels;
  std::size_t extent = cfg.input_size;
  const std::size_t taps = cfg.kernel_small * cfg.kernel_small + cfg.kernel_large * cfg.kernel_large;
  for (std::size_t depth : cfg.block_depths) {
    total += in_ch * depth * taps;  // two conv kernels
    total += 2 * depth;             // two conv biases
    total += 2 * depth;             // BN gamma, beta
    in_ch = depth;
    extent /= 2;
  }
  const std::size_t features = in_ch * extent * extent;
  const std::size_t branches = cfg.augmented ? 2 : 1;
  total += branches * (features * cfg.fc_width + cfg.fc_width);
  total += branches * cfg.fc_width * cfg.num_classes + cfg.num_classes;
  return total;
}

}  // namespace originet::oracle
