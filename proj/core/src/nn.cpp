#include "wildfire/nn.hpp"

#include <cmath>

namespace wildfire::nn {

std::size_t param_count(const ParamList& params) {
    std::size_t n = 0;
    for (const NamedTensor& p : params)
        if (p.learnable) n += p.tensor.size();
    return n;
}

std::vector<Tensor> learnable(const ParamList& params) {
    std::vector<Tensor> out;
    for (const NamedTensor& p : params)
        if (p.learnable) out.push_back(p.tensor);
    return out;
}

namespace {

// Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for both
// weights and biases.
Tensor fan_in_init(Shape shape, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    return Tensor::uniform(std::move(shape), rng, -bound, bound, /*requires_grad=*/true);
}

}  // namespace

Linear::Linear(int in_dim, int out_dim, Rng& rng) {
    if (in_dim <= 0 || out_dim <= 0) throw ConfigError("linear: widths must be positive");
    w = fan_in_init(Shape{in_dim, out_dim}, in_dim, rng);
    b = fan_in_init(Shape{out_dim}, in_dim, rng);
}

Tensor Linear::forward(const Tensor& x) const {
    if (x.dim(-1) != w.dim(0))
        throw DimensionError("linear: input width " + std::to_string(x.dim(-1)) +
                             " does not match layer width " + std::to_string(w.dim(0)));
    return ops::add(ops::matmul(x, w), b);
}

void Linear::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".w", w, true});
    out.push_back({prefix + ".b", b, true});
}

Conv2d::Conv2d(int in_ch, int out_ch, int k, int stride, int padding, Rng& rng)
    : Conv2d(in_ch, out_ch, k, k, stride, stride, padding, padding, rng) {}

Conv2d::Conv2d(int in_ch, int out_ch, int kh, int kw, int sh, int sw, int ph, int pw, Rng& rng)
    : stride_h(sh), stride_w(sw), pad_h(ph), pad_w(pw) {
    if (in_ch <= 0 || out_ch <= 0 || kh <= 0 || kw <= 0)
        throw ConfigError("conv2d: channel and kernel sizes must be positive");
    const int fan_in = in_ch * kh * kw;
    w = fan_in_init(Shape{out_ch, in_ch, kh, kw}, fan_in, rng);
    b = fan_in_init(Shape{out_ch}, fan_in, rng);
}

Tensor Conv2d::forward(const Tensor& x) const {
    return ops::conv2d(x, w, &b, stride_h, stride_w, pad_h, pad_w);
}

void Conv2d::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".w", w, true});
    out.push_back({prefix + ".b", b, true});
}

BatchNorm::BatchNorm(int width) {
    if (width <= 0) throw ConfigError("batchnorm: width must be positive");
    gamma = Tensor(Shape{width}, 1.0, /*requires_grad=*/true);
    beta = Tensor(Shape{width}, 0.0, /*requires_grad=*/true);
    run_mean = Tensor(Shape{width}, 0.0);
    run_var = Tensor(Shape{width}, 1.0);
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode) {
    return ops::batchnorm(x, gamma, beta, run_mean, run_var, momentum, eps, mode);
}

void BatchNorm::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".gamma", gamma, true});
    out.push_back({prefix + ".beta", beta, true});
    out.push_back({prefix + ".run_mean", run_mean, false});
    out.push_back({prefix + ".run_var", run_var, false});
}

LayerNorm::LayerNorm(int width) {
    if (width <= 0) throw ConfigError("layernorm: width must be positive");
    gamma = Tensor(Shape{width}, 1.0, /*requires_grad=*/true);
    beta = Tensor(Shape{width}, 0.0, /*requires_grad=*/true);
}

Tensor LayerNorm::forward(const Tensor& x) const {
    return ops::layernorm(x, gamma, beta, eps);
}

void LayerNorm::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".gamma", gamma, true});
    out.push_back({prefix + ".beta", beta, true});
}

}  // namespace wildfire::nn
