#include "wildfire/models/wiin.hpp"

#include <cmath>

#include "wildfire/data/image.hpp"

namespace wildfire::models {

namespace {

int conv_out(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

void expect_spatial(const Tensor& t, int hw, const char* stage) {
    if (t.dim(-1) != hw || t.dim(-2) != hw)
        throw DimensionError(std::string(stage) + ": expected spatial " + std::to_string(hw) +
                             ", got " + shape_str(t.shape()));
}

void capture_stage(StageCapture* capture, const char* name, const Tensor& t) {
    if (capture) capture->emplace_back(name, t);
}

}  // namespace

ResNetLite::ResNetLite(const WiinConfig& config, Rng& rng) : input_hw_(config.input_hw) {
    if (config.block1_channels != config.stem_channels)
        throw ConfigError("resnet: block1 channels must match the stem for the identity skip");
    stem_ = ConvBn(1, config.stem_channels, 5, 2, 3, rng);
    b1a_ = ConvBn(config.stem_channels, config.block1_channels, 3, 1, 1, rng);
    b1b_ = ConvBn(config.block1_channels, config.block1_channels, 3, 1, 1, rng);
    b1c_ = ConvBn(config.block1_channels, config.block1_channels, 3, 1, 1, rng);
    b2a_ = ConvBn(config.block1_channels, config.block2_channels, 3, 2, 1, rng);
    b2b_ = ConvBn(config.block2_channels, config.block2_channels, 3, 1, 1, rng);
    b2_short_ = ConvBn(config.block1_channels, config.block2_channels, 1, 2, 0, rng);
    collapse_ = nn::Conv2d(config.block2_channels, 1, 1, 1, 0, rng);
}

Tensor ResNetLite::forward(const Tensor& x, Mode mode, StageCapture* capture) {
    if (x.ndim() != 4 || x.dim(1) != 1)
        throw DimensionError("resnet: expected [B, 1, H, W] input, got " + shape_str(x.shape()));
    expect_spatial(x, input_hw_, "resnet input");

    // Stem block: conv(5,2,3) -> BN -> ReLU -> maxpool(3,2,1).
    Tensor s = stem_.conv.forward(x);
    capture_stage(capture, "stem_conv", s);
    s = stem_.bn.forward(s, mode);
    capture_stage(capture, "stem_bn", s);
    s = ops::relu(s);
    s = ops::maxpool2d(s, 3, 2, 1);
    capture_stage(capture, "stem_pool", s);

    // First residual stage at constant width: a two-conv branch and a
    // one-conv branch, each added back onto its input.
    Tensor r = ops::relu(b1a_.forward(s, mode));
    r = b1b_.forward(r, mode);
    Tensor z = ops::relu(ops::add(r, s));
    r = b1c_.forward(z, mode);
    z = ops::relu(ops::add(r, z));
    capture_stage(capture, "block1", z);

    // Second residual stage downsamples; the skip goes through a 1x1
    // stride-2 projection so shapes agree.
    r = ops::relu(b2a_.forward(z, mode));
    r = b2b_.forward(r, mode);
    Tensor shortcut = b2_short_.forward(z, mode);
    z = ops::relu(ops::add(r, shortcut));
    capture_stage(capture, "block2", z);

    z = ops::maxpool2d(z, 4, 1, 0);
    capture_stage(capture, "final_pool", z);
    Tensor out = collapse_.forward(z);
    capture_stage(capture, "collapse", out);

    if (input_hw_ == 100) {
        // The documented trace for the canonical input size.
        expect_spatial(out, 10, "resnet output");
    }
    return out;
}

void ResNetLite::collect(const std::string& prefix, nn::ParamList& out) const {
    stem_.collect(prefix + ".stem", out);
    b1a_.collect(prefix + ".b1a", out);
    b1b_.collect(prefix + ".b1b", out);
    b1c_.collect(prefix + ".b1c", out);
    b2a_.collect(prefix + ".b2a", out);
    b2b_.collect(prefix + ".b2b", out);
    b2_short_.collect(prefix + ".b2_short", out);
    collapse_.collect(prefix + ".collapse", out);
}

Tensor msa(const Tensor& x, const nn::Linear& wq, const nn::Linear& wk,
           const nn::Linear& wv, const nn::Linear& wo, int heads) {
    if (x.ndim() != 3) throw DimensionError("msa: expected [B, T, D] input");
    const int B = x.dim(0), T = x.dim(1), D = x.dim(2);
    if (heads <= 0 || D % heads != 0)
        throw ConfigError("msa: hidden width " + std::to_string(D) +
                          " not divisible by " + std::to_string(heads) + " heads");
    const int dh = D / heads;

    auto split_heads = [&](const Tensor& t) {
        // [B, T, D] -> [B, heads, T, dh]
        return ops::permute(ops::reshape(t, Shape{B, T, heads, dh}), {0, 2, 1, 3});
    };
    Tensor q = split_heads(wq.forward(x));
    Tensor k = split_heads(wk.forward(x));
    Tensor v = split_heads(wv.forward(x));

    Tensor scores = ops::scale(ops::matmul(q, ops::permute(k, {0, 1, 3, 2})),
                               1.0 / std::sqrt(static_cast<double>(dh)));
    Tensor attn = ops::softmax_rows(scores);           // [B, heads, T, T]
    Tensor ctx = ops::matmul(attn, v);                 // [B, heads, T, dh]
    ctx = ops::reshape(ops::permute(ctx, {0, 2, 1, 3}), Shape{B, T, D});
    return wo.forward(ctx);
}

WitBlock::WitBlock(int dim, int heads, int mlp_hidden, double dropout, Rng& rng)
    : heads_(heads),
      dropout_(dropout),
      ln1_(dim),
      ln2_(dim),
      wq_(dim, dim, rng),
      wk_(dim, dim, rng),
      wv_(dim, dim, rng),
      wo_(dim, dim, rng),
      mlp1_(dim, mlp_hidden, rng),
      mlp2_(mlp_hidden, dim, rng) {}

Tensor WitBlock::forward(const Tensor& x, Mode mode, Rng& dropout_rng) {
    Tensor z = ops::add(x, msa(ln1_.forward(x), wq_, wk_, wv_, wo_, heads_));
    Tensor h = mlp1_.forward(ln2_.forward(z));
    h = ops::gelu(h);
    h = ops::dropout(h, dropout_, dropout_rng, mode);
    h = mlp2_.forward(h);
    return ops::add(z, h);
}

void WitBlock::collect(const std::string& prefix, nn::ParamList& out) const {
    ln1_.collect(prefix + ".ln1", out);
    wq_.collect(prefix + ".wq", out);
    wk_.collect(prefix + ".wk", out);
    wv_.collect(prefix + ".wv", out);
    wo_.collect(prefix + ".wo", out);
    ln2_.collect(prefix + ".ln2", out);
    mlp1_.collect(prefix + ".mlp1", out);
    mlp2_.collect(prefix + ".mlp2", out);
}

Wit::Wit(const WiinConfig& config, int fmap_hw, Rng& rng)
    : patch_(config.patch), dim_(config.dim) {
    if (patch_ <= 0 || fmap_hw % patch_ != 0)
        throw ConfigError("wit: feature map size " + std::to_string(fmap_hw) +
                          " is not divisible by patch size " + std::to_string(patch_));
    const int grid = fmap_hw / patch_;
    const int patches = grid * grid;
    tokens_ = patches + 1;

    patch_embed_ = nn::Conv2d(1, dim_, patch_, patch_, 0, rng);
    token_ = Tensor(Shape{1, dim_}, 0.0, /*requires_grad=*/true);
    pos_ = Tensor(Shape{tokens_, dim_}, 0.0, /*requires_grad=*/true);
    for (int l = 0; l < config.layers; ++l)
        blocks_.emplace_back(dim_, config.heads, config.mlp_hidden, config.dropout, rng);
    out_ln_ = nn::LayerNorm(dim_);
    token_head_ = nn::Linear(dim_, 1, rng);
    image_conv_ = nn::Conv2d(dim_, config.image_head_channels, /*kh=*/1, /*kw=*/3,
                             /*sh=*/1, /*sw=*/2, /*ph=*/0, /*pw=*/1, rng);
    const int conv_w = conv_out(patches, 3, 2, 1);
    image_head_ = nn::Linear(config.image_head_channels * conv_w, 1, rng);
}

Tensor Wit::embed(const Tensor& fmap) {
    if (fmap.ndim() != 4 || fmap.dim(1) != 1)
        throw DimensionError("wit: expected [B, 1, H, W] feature maps, got " +
                             shape_str(fmap.shape()));
    if (fmap.dim(2) % patch_ != 0 || fmap.dim(3) % patch_ != 0)
        throw DimensionError("wit: spatial dims " + shape_str(fmap.shape()) +
                             " not divisible by patch size " + std::to_string(patch_));
    const int B = fmap.dim(0);
    const int grid = fmap.dim(2) / patch_;
    const int patches = grid * grid;
    if (patches + 1 != tokens_)
        throw DimensionError("wit: feature map does not match the configured patch grid");

    Tensor e = patch_embed_.forward(fmap);                   // [B, D, grid, grid]
    e = ops::reshape(e, Shape{B, dim_, patches});
    e = ops::permute(e, {0, 2, 1});                          // [B, patches, D]
    Tensor tok = ops::expand_leading(token_, B);             // [B, 1, D]
    Tensor z = ops::concat({tok, e}, 1);                     // [B, tokens, D]
    return ops::add(z, pos_);
}

Tensor Wit::forward(const Tensor& fmap, Mode mode, Rng& dropout_rng, StageCapture* capture) {
    Tensor z = embed(fmap);
    for (WitBlock& block : blocks_) z = block.forward(z, mode, dropout_rng);

    const int B = fmap.dim(0);
    if (capture && B == 1) {
        // Patch rows rearranged back onto the patch grid for the stage dump.
        const int grid = fmap.dim(2) / patch_;
        Tensor rows = ops::permute(ops::slice(z, 1, 1, tokens_ - 1), {0, 2, 1});
        capture->emplace_back("wit_tokens", ops::reshape(rows, Shape{1, dim_, grid, grid}));
    }

    Tensor row0 = ops::reshape(ops::slice(z, 1, 0, 1), Shape{B, dim_});
    Tensor y_token = token_head_.forward(out_ln_.forward(row0));          // [B, 1]

    Tensor rows = ops::permute(ops::slice(z, 1, 1, tokens_ - 1), {0, 2, 1});  // [B, D, N]
    rows = ops::reshape(rows, Shape{B, dim_, 1, tokens_ - 1});
    Tensor c = image_conv_.forward(rows);                                  // [B, C, 1, W]
    c = ops::reshape(c, Shape{B, c.dim(1) * c.dim(3)});
    Tensor y_image = image_head_.forward(c);                               // [B, 1]

    return ops::concat({y_token, y_image}, 1);                             // [B, 2]
}

void Wit::collect(const std::string& prefix, nn::ParamList& out) const {
    patch_embed_.collect(prefix + ".patch_embed", out);
    out.push_back({prefix + ".token", token_, true});
    out.push_back({prefix + ".pos", pos_, true});
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        blocks_[i].collect(prefix + ".block" + std::to_string(i + 1), out);
    out_ln_.collect(prefix + ".out_ln", out);
    token_head_.collect(prefix + ".token_head", out);
    image_conv_.collect(prefix + ".image_conv", out);
    image_head_.collect(prefix + ".image_head", out);
}

Wiin::Wiin(WiinConfig config, std::uint64_t seed)
    : config_(std::move(config)), dropout_rng_(Rng::derive(seed, 2)) {
    Rng init_rng(Rng::derive(seed, 1));
    resnet_ = ResNetLite(config_, init_rng);
    int hw = conv_out(config_.input_hw, 5, 2, 3);  // stem conv
    hw = conv_out(hw, 3, 2, 1);                    // stem pool
    hw = conv_out(hw, 3, 2, 1);                    // block2 downsample
    hw = conv_out(hw, 4, 1, 0);                    // final pool
    wit_ = Wit(config_, hw, init_rng);
}

Tensor Wiin::forward(const Tensor& images, Mode mode, StageCapture* capture) {
    capture_stage(capture, "input", images);
    Tensor fmap = resnet_.forward(images, mode, capture);
    return wit_.forward(fmap, mode, dropout_rng_, capture);
}

std::size_t Wiin::param_count() const { return nn::param_count(params()); }

nn::ParamList Wiin::params(const std::string& prefix) const {
    nn::ParamList out;
    resnet_.collect(prefix + ".resnet", out);
    wit_.collect(prefix + ".wit", out);
    return out;
}

void Wiin::reseed_dropout(std::uint64_t seed) { dropout_rng_ = Rng(Rng::derive(seed, 2)); }

std::vector<double> first_principal_component(const Tensor& fmap, int* out_h, int* out_w) {
    Tensor t = fmap;
    if (t.ndim() == 4) {
        if (t.dim(0) != 1) throw DimensionError("first_principal_component: batch must be 1");
        t = ops::reshape(t, Shape{t.dim(1), t.dim(2), t.dim(3)});
    }
    if (t.ndim() != 3) throw DimensionError("first_principal_component: expected [C, H, W]");
    const int C = t.dim(0), H = t.dim(1), W = t.dim(2);
    const std::size_t pixels = static_cast<std::size_t>(H) * W;
    *out_h = H;
    *out_w = W;

    std::vector<double> proj(pixels, 0.0);
    if (C == 1) {
        for (std::size_t i = 0; i < pixels; ++i) proj[i] = t[i];
    } else {
        std::vector<double> mean(static_cast<std::size_t>(C), 0.0);
        for (int c = 0; c < C; ++c) {
            for (std::size_t i = 0; i < pixels; ++i) mean[static_cast<std::size_t>(c)] += t[c * pixels + i];
            mean[static_cast<std::size_t>(c)] /= static_cast<double>(pixels);
        }
        // Channel covariance, then the leading eigenvector by power iteration.
        std::vector<double> cov(static_cast<std::size_t>(C) * C, 0.0);
        for (int a = 0; a < C; ++a)
            for (int b = a; b < C; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < pixels; ++i)
                    s += (t[a * pixels + i] - mean[static_cast<std::size_t>(a)]) *
                         (t[b * pixels + i] - mean[static_cast<std::size_t>(b)]);
                cov[static_cast<std::size_t>(a) * C + b] = cov[static_cast<std::size_t>(b) * C + a] =
                    s / static_cast<double>(pixels);
            }
        std::vector<double> vec(static_cast<std::size_t>(C), 1.0 / std::sqrt(static_cast<double>(C)));
        std::vector<double> next(static_cast<std::size_t>(C));
        for (int iter = 0; iter < 100; ++iter) {
            for (int a = 0; a < C; ++a) {
                double s = 0.0;
                for (int b = 0; b < C; ++b) s += cov[static_cast<std::size_t>(a) * C + b] * vec[static_cast<std::size_t>(b)];
                next[static_cast<std::size_t>(a)] = s;
            }
            double norm = 0.0;
            for (double v : next) norm += v * v;
            norm = std::sqrt(norm);
            if (norm == 0.0) break;  // isotropic map; keep the previous direction
            for (int a = 0; a < C; ++a) vec[static_cast<std::size_t>(a)] = next[static_cast<std::size_t>(a)] / norm;
        }
        // Fix the sign so the dominant loading is positive.
        int arg = 0;
        for (int a = 1; a < C; ++a)
            if (std::abs(vec[static_cast<std::size_t>(a)]) > std::abs(vec[static_cast<std::size_t>(arg)])) arg = a;
        const double sign = vec[static_cast<std::size_t>(arg)] < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < pixels; ++i) {
            double s = 0.0;
            for (int c = 0; c < C; ++c)
                s += sign * vec[static_cast<std::size_t>(c)] * (t[c * pixels + i] - mean[static_cast<std::size_t>(c)]);
            proj[i] = s;
        }
    }

    double lo = proj[0], hi = proj[0];
    for (double v : proj) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi > lo) {
        for (double& v : proj) v = (v - lo) / (hi - lo);
    } else {
        for (double& v : proj) v = 0.0;
    }
    return proj;
}

void dump_stages(const StageCapture& capture, const std::string& dir) {
    for (std::size_t i = 0; i < capture.size(); ++i) {
        int h = 0, w = 0;
        const std::vector<double> pc = first_principal_component(capture[i].second, &h, &w);
        data::write_pgm(dir + "/stage" + std::to_string(i) + "_" + capture[i].first + ".pgm",
                        w, h, pc);
    }
}

}  // namespace wildfire::models
