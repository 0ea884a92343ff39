#pragma once

#include <string>
#include <vector>

#include "wildfire/ops.hpp"
#include "wildfire/rng.hpp"
#include "wildfire/tensor.hpp"

namespace wildfire::nn {

// One named buffer of a model. Learnable entries feed the optimizer;
// non-learnable ones (batch-norm running stats) are still checkpointed so a
// reloaded model evaluates identically.
struct NamedTensor {
    std::string name;
    Tensor tensor;
    bool learnable = true;
};

using ParamList = std::vector<NamedTensor>;

// Scalar learnables across the list (running stats excluded).
std::size_t param_count(const ParamList& params);

// The learnable subset, in list order, for the optimizer.
std::vector<Tensor> learnable(const ParamList& params);

// Fully connected layer, y = x.w + b with w stored [in, out]. Accepts
// [B, in] or [B, T, in] inputs (w is shared across leading axes).
class Linear {
public:
    Linear() = default;
    Linear(int in_dim, int out_dim, Rng& rng);

    Tensor forward(const Tensor& x) const;
    void collect(const std::string& prefix, ParamList& out) const;
    std::size_t param_count() const { return w.size() + b.size(); }

    Tensor w, b;
};

// 2-D convolution over NCHW with an optional rectangular window, so a 1-D
// convolution over a token axis can reuse it with H = 1.
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int k, int stride, int padding, Rng& rng);
    Conv2d(int in_ch, int out_ch, int kh, int kw, int stride_h, int stride_w,
           int pad_h, int pad_w, Rng& rng);

    Tensor forward(const Tensor& x) const;
    void collect(const std::string& prefix, ParamList& out) const;
    std::size_t param_count() const { return w.size() + b.size(); }

    Tensor w, b;
    int stride_h = 1, stride_w = 1, pad_h = 0, pad_w = 0;
};

// Batch normalization over [B, F] (per feature) or [B, C, H, W]
// (per channel). Scale starts at 1, shift at 0, running stats at (0, 1).
class BatchNorm {
public:
    BatchNorm() = default;
    explicit BatchNorm(int width);

    Tensor forward(const Tensor& x, Mode mode);
    void collect(const std::string& prefix, ParamList& out) const;
    std::size_t param_count() const { return gamma.size() + beta.size(); }

    Tensor gamma, beta;
    Tensor run_mean, run_var;  // not learnable
    double momentum = 0.1;
    double eps = 1e-6;
};

// Layer normalization over the last axis.
class LayerNorm {
public:
    LayerNorm() = default;
    explicit LayerNorm(int width);

    Tensor forward(const Tensor& x) const;
    void collect(const std::string& prefix, ParamList& out) const;
    std::size_t param_count() const { return gamma.size() + beta.size(); }

    Tensor gamma, beta;
    double eps = 1e-8;
};

}  // namespace wildfire::nn
