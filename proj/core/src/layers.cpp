#include "originet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "originet/error.hpp"

namespace originet {

namespace {

struct ConvGeometry {
  std::size_t n, c, h, w;      // input
  std::size_t d, ky, kx;       // kernel
  std::size_t oh, ow;          // output
  std::size_t stride;
  Padding pad;

  std::size_t patch() const { return c * ky * kx; }
  std::size_t pixels() const { return oh * ow; }
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& kernel, std::size_t stride,
                           Padding pad) {
  require_rank(input, 4, "conv2d input");
  require_rank(kernel, 4, "conv2d kernel");
  if (stride == 0) throw ArgumentError("conv2d stride must be positive");
  if (input.dim(1) != kernel.dim(1)) {
    throw DimensionError("conv2d: input channel axis (1) has " + std::to_string(input.dim(1)) +
                         " but kernel input-channel axis (1) has " +
                         std::to_string(kernel.dim(1)));
  }
  ConvGeometry g{};
  g.n = input.dim(0);
  g.c = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.d = kernel.dim(0);
  g.ky = kernel.dim(2);
  g.kx = kernel.dim(3);
  g.stride = stride;
  g.pad = pad;
  g.oh = conv_output_extent(g.h, pad.top, pad.bottom, g.ky, stride);
  g.ow = conv_output_extent(g.w, pad.left, pad.right, g.kx, stride);
  return g;
}

// Unfolds one sample into cols[patch][pixels]; padding reads as zero.
void im2col(const double* in, const ConvGeometry& g, std::vector<double>& cols) {
  cols.assign(g.patch() * g.pixels(), 0.0);
  for (std::size_t c = 0; c < g.c; ++c) {
    const double* plane = in + c * g.h * g.w;
    for (std::size_t i = 0; i < g.ky; ++i) {
      for (std::size_t j = 0; j < g.kx; ++j) {
        double* row = cols.data() + ((c * g.ky + i) * g.kx + j) * g.pixels();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) -
                                    static_cast<std::ptrdiff_t>(g.pad.top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          const double* src = plane + static_cast<std::size_t>(iy) * g.w;
          double* dst = row + oy * g.ow;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) -
                                      static_cast<std::ptrdiff_t>(g.pad.left);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.w)) dst[ox] = src[ix];
          }
        }
      }
    }
  }
}

// Scatter-adds cols back onto one sample's input gradient.
void col2im(const std::vector<double>& cols, const ConvGeometry& g, double* in_grad) {
  for (std::size_t c = 0; c < g.c; ++c) {
    double* plane = in_grad + c * g.h * g.w;
    for (std::size_t i = 0; i < g.ky; ++i) {
      for (std::size_t j = 0; j < g.kx; ++j) {
        const double* row = cols.data() + ((c * g.ky + i) * g.kx + j) * g.pixels();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) -
                                    static_cast<std::ptrdiff_t>(g.pad.top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          double* dst = plane + static_cast<std::size_t>(iy) * g.w;
          const double* src = row + oy * g.ow;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) -
                                      static_cast<std::ptrdiff_t>(g.pad.left);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

void require_finite(const Tensor& t, const char* what) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
  }
}

}  // namespace

std::size_t conv_output_extent(std::size_t extent, std::size_t pad_lo, std::size_t pad_hi,
                               std::size_t kernel, std::size_t stride) {
  const std::size_t padded = extent + pad_lo + pad_hi;
  if (padded < kernel) {
    throw DimensionError("conv2d: padded extent " + std::to_string(padded) +
                         " is smaller than kernel extent " + std::to_string(kernel));
  }
  return (padded - kernel) / stride + 1;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                      std::size_t stride, Padding pad) {
  const ConvGeometry g = conv_geometry(input, kernel, stride, pad);
  require_rank(bias, 1, "conv2d bias");
  if (bias.dim(0) != g.d) {
    throw DimensionError("conv2d: bias axis (0) has " + std::to_string(bias.dim(0)) +
                         " but kernel filter axis (0) has " + std::to_string(g.d));
  }

  Tensor out({g.n, g.d, g.oh, g.ow});
  const std::size_t patch = g.patch();
  const std::size_t pixels = g.pixels();
  std::vector<double> cols;
  // Samples are independent; this loop is the batch-parallel seam.
  for (std::size_t n = 0; n < g.n; ++n) {
    im2col(input.data().data() + n * g.c * g.h * g.w, g, cols);
    double* out_n = out.data().data() + n * g.d * pixels;
    for (std::size_t d = 0; d < g.d; ++d) {
      double* orow = out_n + d * pixels;
      std::fill(orow, orow + pixels, bias[d]);
      const double* wrow = kernel.data().data() + d * patch;
      for (std::size_t k = 0; k < patch; ++k) {
        const double wk = wrow[k];
        const double* crow = cols.data() + k * pixels;
        for (std::size_t p = 0; p < pixels; ++p) orow[p] += wk * crow[p];
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernel, const Tensor& output_grad,
                          std::size_t stride, Padding pad) {
  const ConvGeometry g = conv_geometry(input, kernel, stride, pad);
  const Shape expected{g.n, g.d, g.oh, g.ow};
  if (output_grad.shape() != expected) {
    throw DimensionError("conv2d_backward: output_grad shape " +
                         shape_string(output_grad.shape()) + " does not match forward output " +
                         shape_string(expected));
  }

  ConvGrads grads{Tensor(input.shape()), Tensor(kernel.shape()), Tensor({g.d})};
  const std::size_t patch = g.patch();
  const std::size_t pixels = g.pixels();
  std::vector<double> cols;
  std::vector<double> dcols(patch * pixels);
  for (std::size_t n = 0; n < g.n; ++n) {
    im2col(input.data().data() + n * g.c * g.h * g.w, g, cols);
    const double* go = output_grad.data().data() + n * g.d * pixels;

    for (std::size_t d = 0; d < g.d; ++d) {
      const double* grow = go + d * pixels;
      double bsum = 0.0;
      for (std::size_t p = 0; p < pixels; ++p) bsum += grow[p];
      grads.bias[d] += bsum;
      double* kgrad = grads.kernel.data().data() + d * patch;
      for (std::size_t k = 0; k < patch; ++k) {
        const double* crow = cols.data() + k * pixels;
        double acc = 0.0;
        for (std::size_t p = 0; p < pixels; ++p) acc += grow[p] * crow[p];
        kgrad[k] += acc;
      }
    }

    std::fill(dcols.begin(), dcols.end(), 0.0);
    for (std::size_t d = 0; d < g.d; ++d) {
      const double* grow = go + d * pixels;
      const double* wrow = kernel.data().data() + d * patch;
      for (std::size_t k = 0; k < patch; ++k) {
        const double wk = wrow[k];
        double* drow = dcols.data() + k * pixels;
        for (std::size_t p = 0; p < pixels; ++p) drow[p] += wk * grow[p];
      }
    }
    col2im(dcols, g, grads.input.data().data() + n * g.c * g.h * g.w);
  }
  return grads;
}

BatchNormResult batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                                  Mode mode, const BatchNormStats& stats, double eps,
                                  double momentum) {
  require_rank(input, 4, "batchnorm input");
  const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
    throw DimensionError("batchnorm: gamma/beta must have shape [" + std::to_string(c) +
                         "] to match input channel axis (1), got " + shape_string(gamma.shape()) +
                         " and " + shape_string(beta.shape()));
  }

  BatchNormResult result{Tensor(input.shape()), {}, stats};
  if (mode == Mode::Eval) {
    if (!stats.populated) throw StateError("batchnorm: eval mode requires populated running stats");
    if (stats.running_mean.shape() != Shape{c} || stats.running_var.shape() != Shape{c}) {
      throw DimensionError("batchnorm: running stats do not match channel count");
    }
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double scale = gamma[ch] / std::sqrt(stats.running_var[ch] + eps);
      const double shift = beta[ch] - stats.running_mean[ch] * scale;
      for (std::size_t b = 0; b < n; ++b) {
        const double* src = input.data().data() + (b * c + ch) * hw;
        double* dst = result.output.data().data() + (b * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) dst[i] = src[i] * scale + shift;
      }
    }
    return result;
  }

  const double count = static_cast<double>(n * hw);
  result.cache.normalized = Tensor(input.shape());
  result.cache.inv_std = Tensor({c});
  Tensor new_mean({c}), new_var({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double* src = input.data().data() + (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) mean += src[i];
    }
    mean /= count;
    double var = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double* src = input.data().data() + (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) var += (src[i] - mean) * (src[i] - mean);
    }
    var /= count;
    const double inv_std = 1.0 / std::sqrt(var + eps);
    result.cache.inv_std[ch] = inv_std;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      const double* src = input.data().data() + off;
      double* xhat = result.cache.normalized.data().data() + off;
      double* dst = result.output.data().data() + off;
      for (std::size_t i = 0; i < hw; ++i) {
        xhat[i] = (src[i] - mean) * inv_std;
        dst[i] = gamma[ch] * xhat[i] + beta[ch];
      }
    }
    new_mean[ch] = mean;
    new_var[ch] = count > 1.0 ? var * count / (count - 1.0) : var;
  }

  if (!stats.populated) {
    result.stats.running_mean = Tensor({c}, 0.0);
    result.stats.running_var = Tensor({c}, 1.0);
  }
  for (std::size_t ch = 0; ch < c; ++ch) {
    result.stats.running_mean[ch] =
        (1.0 - momentum) * result.stats.running_mean[ch] + momentum * new_mean[ch];
    result.stats.running_var[ch] =
        (1.0 - momentum) * result.stats.running_var[ch] + momentum * new_var[ch];
  }
  result.stats.populated = true;
  return result;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                  const Tensor& output_grad) {
  if (cache.normalized.empty()) throw StateError("batchnorm_backward: missing train-mode cache");
  require_same_shape(output_grad, cache.normalized, "batchnorm_backward output_grad");
  const std::size_t n = output_grad.dim(0), c = output_grad.dim(1);
  const std::size_t hw = output_grad.dim(2) * output_grad.dim(3);
  if (gamma.shape() != Shape{c}) throw DimensionError("batchnorm_backward: gamma shape mismatch");

  BatchNormGrads grads{Tensor(output_grad.shape()), Tensor({c}), Tensor({c})};
  const double count = static_cast<double>(n * hw);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      const double* g = output_grad.data().data() + off;
      const double* xhat = cache.normalized.data().data() + off;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xhat[i];
      }
    }
    grads.beta[ch] = sum_g;
    grads.gamma[ch] = sum_gx;
    // dx = gamma * inv_std * (g - mean(g) - xhat * mean(g * xhat))
    const double scale = gamma[ch] * cache.inv_std[ch];
    const double mean_g = sum_g / count, mean_gx = sum_gx / count;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      const double* g = output_grad.data().data() + off;
      const double* xhat = cache.normalized.data().data() + off;
      double* dx = grads.input.data().data() + off;
      for (std::size_t i = 0; i < hw; ++i) dx[i] = scale * (g[i] - mean_g - xhat[i] * mean_gx);
    }
  }
  return grads;
}

Tensor linear_forward(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_rank(input, 2, "linear input");
  require_rank(weight, 2, "linear weight");
  require_rank(bias, 1, "linear bias");
  const std::size_t n = input.dim(0), fin = input.dim(1), fout = weight.dim(0);
  if (weight.dim(1) != fin) {
    throw DimensionError("linear: input feature axis (1) has " + std::to_string(fin) +
                         " but weight input axis (1) has " + std::to_string(weight.dim(1)));
  }
  if (bias.dim(0) != fout) {
    throw DimensionError("linear: bias axis (0) has " + std::to_string(bias.dim(0)) +
                         " but weight output axis (0) has " + std::to_string(fout));
  }
  Tensor out({n, fout});
  for (std::size_t b = 0; b < n; ++b) {
    const double* x = input.data().data() + b * fin;
    for (std::size_t o = 0; o < fout; ++o) {
      const double* w = weight.data().data() + o * fin;
      double acc = 0.0;
      for (std::size_t i = 0; i < fin; ++i) acc += w[i] * x[i];
      out.at(b, o) = acc + bias[o];
    }
  }
  return out;
}

LinearGrads linear_backward(const Tensor& input, const Tensor& weight, const Tensor& output_grad) {
  require_rank(input, 2, "linear_backward input");
  require_rank(weight, 2, "linear_backward weight");
  require_rank(output_grad, 2, "linear_backward output_grad");
  const std::size_t n = input.dim(0), fin = input.dim(1), fout = weight.dim(0);
  if (weight.dim(1) != fin || output_grad.dim(0) != n || output_grad.dim(1) != fout) {
    throw DimensionError("linear_backward: shapes input " + shape_string(input.shape()) +
                         ", weight " + shape_string(weight.shape()) + ", output_grad " +
                         shape_string(output_grad.shape()) + " are inconsistent");
  }
  LinearGrads grads{Tensor(input.shape()), Tensor(weight.shape()), Tensor({fout})};
  for (std::size_t b = 0; b < n; ++b) {
    const double* x = input.data().data() + b * fin;
    double* dx = grads.input.data().data() + b * fin;
    for (std::size_t o = 0; o < fout; ++o) {
      const double g = output_grad.at(b, o);
      grads.bias[o] += g;
      double* dw = grads.weight.data().data() + o * fin;
      const double* w = weight.data().data() + o * fin;
      for (std::size_t i = 0; i < fin; ++i) {
        dw[i] += g * x[i];
        dx[i] += g * w[i];
      }
    }
  }
  return grads;
}

Tensor softmax(const Tensor& logits) {
  require_rank(logits, 2, "softmax logits");
  require_finite(logits, "softmax logits");
  const std::size_t n = logits.dim(0), z = logits.dim(1);
  Tensor probs(logits.shape());
  for (std::size_t b = 0; b < n; ++b) {
    double mx = logits.at(b, 0);
    for (std::size_t k = 1; k < z; ++k) mx = std::max(mx, logits.at(b, k));
    double sum = 0.0;
    for (std::size_t k = 0; k < z; ++k) {
      const double e = std::exp(logits.at(b, k) - mx);
      probs.at(b, k) = e;
      sum += e;
    }
    for (std::size_t k = 0; k < z; ++k) probs.at(b, k) /= sum;
  }
  return probs;
}

LossResult cross_entropy_loss(const Tensor& probs, std::span<const std::size_t> labels) {
  require_rank(probs, 2, "cross_entropy probs");
  const std::size_t n = probs.dim(0), z = probs.dim(1);
  if (labels.size() != n) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                         std::to_string(n));
  }
  LossResult result{0.0, probs};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t b = 0; b < n; ++b) {
    if (labels[b] >= z) {
      throw IndexError("cross_entropy: label " + std::to_string(labels[b]) + " at row " +
                       std::to_string(b) + " outside [0, " + std::to_string(z) + ")");
    }
    const double p = std::max(probs.at(b, labels[b]), std::numeric_limits<double>::min());
    result.loss -= std::log(p);
    result.logits_grad.at(b, labels[b]) -= 1.0;
  }
  result.loss *= inv_n;
  for (double& g : result.logits_grad.data()) g *= inv_n;
  return result;
}

SgdState sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr,
                  double momentum, SgdState state) {
  if (params.size() != grads.size()) {
    throw DimensionError("sgd_step: " + std::to_string(params.size()) + " params but " +
                         std::to_string(grads.size()) + " grads");
  }
  if (lr < 0.0) throw ArgumentError("sgd_step: learning rate must be non-negative");
  if (momentum < 0.0 || momentum >= 1.0) throw ArgumentError("sgd_step: momentum must be in [0, 1)");
  if (state.velocity.empty()) {
    state.velocity.reserve(params.size());
    for (const Tensor& g : grads) state.velocity.emplace_back(g.shape());
  }
  if (state.velocity.size() != params.size()) {
    throw StateError("sgd_step: velocity state does not match parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    require_same_shape(p, grads[i], "sgd_step param/grad");
    require_same_shape(p, state.velocity[i], "sgd_step param/velocity");
    double* v = state.velocity[i].data().data();
    const double* g = grads[i].data().data();
    double* w = p.data().data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      v[k] = momentum * v[k] + g[k];
      w[k] -= lr * v[k];
    }
  }
  return state;
}

}  // namespace originet
