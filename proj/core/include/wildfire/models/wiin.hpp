#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wildfire/nn.hpp"

namespace wildfire::models {

struct WiinConfig {
    int input_hw = 100;          // images are input_hw x input_hw
    int stem_channels = 16;
    int block1_channels = 16;
    int block2_channels = 32;
    int patch = 2;               // P
    int dim = 64;                // transformer hidden width D
    int layers = 2;
    int heads = 8;
    int mlp_hidden = 8;
    double dropout = 0.2;
    int image_head_channels = 4; // token-axis conv before the image head
};

// Named intermediate feature maps captured during a forward pass, for the
// PGM stage dumps.
using StageCapture = std::vector<std::pair<std::string, Tensor>>;

// Conv followed by batch norm; the residual branches are built from these.
struct ConvBn {
    ConvBn() = default;
    ConvBn(int in_ch, int out_ch, int k, int stride, int padding, Rng& rng)
        : conv(in_ch, out_ch, k, stride, padding, rng), bn(out_ch) {}

    Tensor forward(const Tensor& x, Mode mode) { return bn.forward(conv.forward(x), mode); }
    void collect(const std::string& prefix, nn::ParamList& out) const {
        conv.collect(prefix + ".conv", out);
        bn.collect(prefix + ".bn", out);
    }

    nn::Conv2d conv;
    nn::BatchNorm bn;
};

// The ResNet-lite feature extractor: stem conv block, a three-conv residual
// stage, a downsampling two-conv residual stage, a final max pool, and a 1x1
// channel collapse. Spatial trace on 100x100 input: 51, 26, 26, 13, 10.
class ResNetLite {
public:
    ResNetLite() = default;
    ResNetLite(const WiinConfig& config, Rng& rng);

    // x: [B, 1, hw, hw] -> [B, 1, 10, 10]
    Tensor forward(const Tensor& x, Mode mode, StageCapture* capture = nullptr);
    void collect(const std::string& prefix, nn::ParamList& out) const;

private:
    int input_hw_ = 100;
    ConvBn stem_;
    ConvBn b1a_, b1b_;   // two-conv residual
    ConvBn b1c_;         // one-conv residual
    ConvBn b2a_, b2b_;   // downsampling pair
    ConvBn b2_short_;    // 1x1 stride-2 projection shortcut
    nn::Conv2d collapse_;
};

// Multi-head self-attention over [B, T, D]: per-head scaled dot-product
// scores, row softmax, head concatenation, output projection.
Tensor msa(const Tensor& x, const nn::Linear& wq, const nn::Linear& wk,
           const nn::Linear& wv, const nn::Linear& wo, int heads);

// One pre-norm transformer block: x + MSA(LN(x)), then x + MLP(LN(x)) with
// the MLP being linear -> GELU -> dropout -> linear.
class WitBlock {
public:
    WitBlock() = default;
    WitBlock(int dim, int heads, int mlp_hidden, double dropout, Rng& rng);

    Tensor forward(const Tensor& x, Mode mode, Rng& dropout_rng);
    void collect(const std::string& prefix, nn::ParamList& out) const;

private:
    int heads_ = 1;
    double dropout_ = 0.0;
    nn::LayerNorm ln1_, ln2_;
    nn::Linear wq_, wk_, wv_, wo_;
    nn::Linear mlp1_, mlp2_;
};

// The transformer stage: patch embedding by a stride-P conv, learnable token
// and positional encoding (both zero-initialized), `layers` blocks, then the
// two scalar heads (token feature from row 0, image feature from a 1-D conv
// over the patch rows).
class Wit {
public:
    Wit() = default;
    Wit(const WiinConfig& config, int fmap_hw, Rng& rng);

    // fmap: [B, 1, hw, hw] -> [B, 2] with columns (token_feature, image_feature)
    Tensor forward(const Tensor& fmap, Mode mode, Rng& dropout_rng,
                   StageCapture* capture = nullptr);
    // Embedded sequence before the blocks: [B, N+1, D].
    Tensor embed(const Tensor& fmap);
    void collect(const std::string& prefix, nn::ParamList& out) const;

private:
    int patch_ = 2, dim_ = 64, tokens_ = 26;
    nn::Conv2d patch_embed_;
    Tensor token_, pos_;
    std::vector<WitBlock> blocks_;
    nn::LayerNorm out_ln_;
    nn::Linear token_head_;
    nn::Conv2d image_conv_;
    nn::Linear image_head_;
};

// Wildfire-imagery feature extractor: ResNet-lite into the transformer,
// emitting two scalar features per image.
class Wiin {
public:
    Wiin() = default;
    Wiin(WiinConfig config, std::uint64_t seed);

    // images: [B, 1, hw, hw] -> [B, 2]
    Tensor forward(const Tensor& images, Mode mode, StageCapture* capture = nullptr);

    std::size_t param_count() const;
    nn::ParamList params(const std::string& prefix = "wiin") const;
    const WiinConfig& config() const { return config_; }

    // Restart the dropout stream (training determinism, gradient checks).
    void reseed_dropout(std::uint64_t seed);

private:
    WiinConfig config_;
    ResNetLite resnet_;
    Wit wit_;
    Rng dropout_rng_{0};
};

// First principal component across channels of a [C, H, W] map (the [1, C,
// H, W] batch dim may be present), rescaled to [0, 1] for image dumps. For a
// single channel this is min-max normalization.
std::vector<double> first_principal_component(const Tensor& fmap, int* out_h, int* out_w);

// Write every captured stage of a single-image forward as PGM files under
// `dir` (one file per stage, named by stage).
void dump_stages(const StageCapture& capture, const std::string& dir);

}  // namespace wildfire::models
