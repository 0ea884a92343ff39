#pragma once

#include <vector>

#include "wildfire/rng.hpp"
#include "wildfire/tensor.hpp"

namespace wildfire {

enum class Mode { Train, Eval };

namespace ops {

// ---- structural -----------------------------------------------------------

// b must have the same shape as a, or a shape that is a suffix of a's
// (bias / positional-encoding broadcast over the leading axes).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor scale(const Tensor& a, double c);

Tensor reshape(const Tensor& t, Shape shape);
Tensor permute(const Tensor& t, const std::vector<int>& axes);
Tensor slice(const Tensor& t, int axis, int start, int len);
Tensor concat(const std::vector<Tensor>& parts, int axis);
// [d0, d1, ...] -> [copies, d0, d1, ...]; backward sums over the new axis.
Tensor expand_leading(const Tensor& t, int copies);

// ---- linear algebra --------------------------------------------------------

// a: [batch..., m, k], b: [batch..., k, n] with identical leading dims, or a
// shared 2-D b: [k, n]. Gradients: da = g.b^T, db = a^T.g (summed over batch
// when b is shared).
Tensor matmul(const Tensor& a, const Tensor& b);

// ---- convolution / pooling (NCHW) ------------------------------------------

// input: [B, C_in, H, W]; kernels: [C_out, C_in, kh, kw]; zero padding;
// computed as cross-correlation. A 3-D input [C,H,W] is accepted as batch 1.
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor* bias,
              int stride_h, int stride_w, int pad_h, int pad_w);
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor* bias,
              int stride, int padding);

// Per-window maximum; padded cells never win; gradient routes to the argmax
// cell, first index in scan order on ties.
Tensor maxpool2d(const Tensor& input, int k, int stride, int padding);

// ---- activations / normalization -------------------------------------------

Tensor relu(const Tensor& x);
// Exact form x * 0.5 * (1 + erf(x / sqrt(2))).
Tensor gelu(const Tensor& x);
Tensor logistic(const Tensor& x);
// Softmax over the last axis; every row sums to 1.
Tensor softmax_rows(const Tensor& x);
// Normalizes over the last axis, then applies the learned scale/shift.
Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 double eps);

// x: [B, F] (per-feature stats over the batch) or [B, C, H, W] (per-channel
// stats over batch and space). Train mode uses batch statistics (population
// variance) and folds them into the running buffers with the given momentum;
// eval mode normalizes with the running buffers.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 Tensor& running_mean, Tensor& running_var, double momentum,
                 double eps, Mode mode);

// Train mode zeroes entries with probability `rate` and scales survivors by
// 1/(1-rate); eval mode is the identity. Mask decisions come from `rng`.
Tensor dropout(const Tensor& x, double rate, Rng& rng, Mode mode);

// ---- reductions / losses ----------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor mse_loss(const Tensor& pred, const Tensor& target);
// logits/onehot: [B, C]; rows of onehot must be exact one-hot vectors.
// Stabilized by max-subtraction.
Tensor cross_entropy_loss(const Tensor& logits, const Tensor& onehot);

}  // namespace ops
}  // namespace wildfire
