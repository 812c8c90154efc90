#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "originet/tensor.hpp"

namespace originet {

/// Per-side zero padding.
struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;

  static Padding uniform(std::size_t p) { return {p, p, p, p}; }
  bool operator==(const Padding&) const = default;
};

// ---------------------------------------------------------------------------
// Convolution
//
// Cross-correlation, no kernel flip:
//   out[n,d,y,x] = bias[d] + sum_{c,i,j} in[n,c, y*S + i - top, x*S + j - left] * k[d,c,i,j]
// with out-of-range input reads treated as zero. In 1-based indexing the
// window anchor for output row l is S*l - (S-1); with 0-based rows that is
// simply S*l, which is the form used here.
// ---------------------------------------------------------------------------

struct ConvGrads {
  Tensor input;
  Tensor kernel;
  Tensor bias;
};

/// Output spatial extent along one axis; throws DimensionError if the padded
/// extent is smaller than the kernel.
std::size_t conv_output_extent(std::size_t extent, std::size_t pad_lo, std::size_t pad_hi,
                               std::size_t kernel, std::size_t stride);

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                      std::size_t stride, Padding pad);

ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernel, const Tensor& output_grad,
                          std::size_t stride, Padding pad);

// ---------------------------------------------------------------------------
// Batch normalization (per channel over N, H, W)
// ---------------------------------------------------------------------------

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

enum class Mode { Train, Eval };

struct BatchNormStats {
  Tensor running_mean;  // [C]
  Tensor running_var;   // [C]
  bool populated = false;

  bool operator==(const BatchNormStats&) const = default;
};

struct BatchNormCache {
  Tensor normalized;  // x_hat, same shape as input
  Tensor inv_std;     // [C]
};

struct BatchNormResult {
  Tensor output;
  BatchNormCache cache;   // only meaningful in train mode
  BatchNormStats stats;   // updated running statistics (unchanged in eval mode)
};

struct BatchNormGrads {
  Tensor input;
  Tensor gamma;
  Tensor beta;
};

/// Train mode normalizes with biased batch statistics and returns running
/// statistics advanced by an exponential moving average (unbiased variance).
/// Eval mode requires populated running statistics.
BatchNormResult batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                                  Mode mode, const BatchNormStats& stats,
                                  double eps = kBatchNormEps,
                                  double momentum = kBatchNormMomentum);

/// Adjoint of the train-mode forward, including the dependence of the batch
/// mean and variance on the input.
BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                  const Tensor& output_grad);

// ---------------------------------------------------------------------------
// Fully connected
// ---------------------------------------------------------------------------

struct LinearGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};

/// out = input * weight^T + bias; input [N, Fin], weight [Fout, Fin].
Tensor linear_forward(const Tensor& input, const Tensor& weight, const Tensor& bias);
LinearGrads linear_backward(const Tensor& input, const Tensor& weight, const Tensor& output_grad);

// ---------------------------------------------------------------------------
// Softmax and loss
// ---------------------------------------------------------------------------

/// Row-wise max-shifted softmax of [N, Z] logits.
Tensor softmax(const Tensor& logits);

struct LossResult {
  double loss = 0.0;
  Tensor logits_grad;  // (probs - onehot) / N
};

/// Mean negative log-likelihood of the true class, plus the gradient of that
/// loss with respect to the logits that produced `probs` through softmax.
LossResult cross_entropy_loss(const Tensor& probs, std::span<const std::size_t> labels);

// ---------------------------------------------------------------------------
// SGD with momentum: v <- momentum * v + g; p <- p - lr * v
// ---------------------------------------------------------------------------

struct SgdState {
  std::vector<Tensor> velocity;
};

/// Updates params in place and returns the advanced state. An empty state is
/// treated as zero velocity.
SgdState sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr,
                  double momentum, SgdState state);

}  // namespace originet
