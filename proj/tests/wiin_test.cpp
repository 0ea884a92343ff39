#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "gradcheck.hpp"
#include "oracle.hpp"
#include "wildfire/models/wiin.hpp"
#include "wildfire/ops.hpp"

using namespace wildfire;
using models::StageCapture;
using models::WiinConfig;

namespace {

// Small geometry that still exercises every stage: 52 -> 27 -> 14 -> 7 -> 4,
// a 2x2 patch grid, and a width-8 transformer.
WiinConfig tiny_config() {
    WiinConfig cfg;
    cfg.input_hw = 52;
    cfg.stem_channels = 4;
    cfg.block1_channels = 4;
    cfg.block2_channels = 6;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.mlp_hidden = 4;
    cfg.image_head_channels = 2;
    return cfg;
}

Tensor random_images(int b, int hw, std::uint64_t seed) {
    Rng rng(seed);
    return Tensor::uniform({b, 1, hw, hw}, rng, 0.0, 1.0);
}

}  // namespace

TEST_CASE("default parameter count matches the closed form") {
    models::Wiin wiin(WiinConfig{}, 1);
    CHECK(wiin.param_count() == static_cast<std::size_t>(oracle::wiin_param_count()));
    CHECK(wiin.param_count() == 61211);
}

TEST_CASE("spatial trace through the convolutional stage is 51, 26, 26, 13, 10") {
    models::Wiin wiin(WiinConfig{}, 2);
    Tensor x = random_images(1, 100, 3);
    StageCapture capture;
    Tensor out = wiin.forward(x, Mode::Eval, &capture);
    CHECK(out.dim(0) == 1);
    CHECK(out.dim(1) == 2);

    std::map<std::string, Shape> stages;
    for (const auto& [name, t] : capture) stages[name] = t.shape();
    REQUIRE(stages.count("stem_conv"));
    CHECK(stages["stem_conv"] == Shape{1, 16, 51, 51});
    CHECK(stages["stem_pool"] == Shape{1, 16, 26, 26});
    CHECK(stages["block1"] == Shape{1, 16, 26, 26});
    CHECK(stages["block2"] == Shape{1, 32, 13, 13});
    CHECK(stages["final_pool"] == Shape{1, 32, 10, 10});
    CHECK(stages["collapse"] == Shape{1, 1, 10, 10});
    CHECK(stages["wit_tokens"] == Shape{1, 64, 5, 5});
}

TEST_CASE("the transformer sees 25 patches plus one token at width 64") {
    WiinConfig cfg;
    Rng rng(4);
    models::Wit wit(cfg, 10, rng);
    Tensor fmap = Tensor::uniform({2, 1, 10, 10}, rng, -1, 1);
    Tensor z = wit.embed(fmap);
    CHECK(z.dim(0) == 2);
    CHECK(z.dim(1) == 26);
    CHECK(z.dim(2) == 64);

    // token and positional table start at zero, so row 0 is exactly zero
    for (int d = 0; d < 64; ++d) CHECK(z[static_cast<std::size_t>(d)] == 0.0);

    CHECK_THROWS_AS(wit.embed(Tensor({2, 1, 9, 9})), DimensionError);
    CHECK_THROWS_AS(wit.embed(Tensor({2, 1, 12, 12})), DimensionError);
}

TEST_CASE("multi-head attention shapes and gradients") {
    Rng rng(5);
    const int D = 8;
    nn::Linear wq(D, D, rng), wk(D, D, rng), wv(D, D, rng), wo(D, D, rng);
    Tensor x = Tensor::uniform({2, 3, D}, rng, -0.8, 0.8, true);
    Tensor out = models::msa(x, wq, wk, wv, wo, 2);
    CHECK(out.shape() == Shape{2, 3, D});

    CHECK_THROWS_AS(models::msa(x, wq, wk, wv, wo, 3), ConfigError);
    CHECK_THROWS_AS(models::msa(Tensor({3, D}), wq, wk, wv, wo, 2), DimensionError);

    Rng wrng(6);
    Tensor w = Tensor::uniform({2, 3, D}, wrng, 0.5, 1.5);
    auto r = testutil::grad_check(
        [&]() { return ops::sum(ops::mul(models::msa(x, wq, wk, wv, wo, 2), w)); },
        {{"x", x}, {"wq.w", wq.w}, {"wo.w", wo.w}, {"wv.b", wv.b}},
        1e-4, 1e-6, 1e-4, 8);
    INFO(r.worst);
    CHECK(r.ok);
}

TEST_CASE("attention rows are a convex mixture: uniform value rows pass through") {
    // with wv = identity mapping each value row to itself and all value rows
    // equal, any softmax weighting returns that same row
    Rng rng(7);
    const int D = 4;
    nn::Linear wq(D, D, rng), wk(D, D, rng), wv(D, D, rng), wo(D, D, rng);
    for (std::size_t i = 0; i < wv.w.size(); ++i) wv.w[i] = (i % (D + 1) == 0) ? 1.0 : 0.0;
    std::fill(wv.b.values().begin(), wv.b.values().end(), 0.0);
    for (std::size_t i = 0; i < wo.w.size(); ++i) wo.w[i] = (i % (D + 1) == 0) ? 1.0 : 0.0;
    std::fill(wo.b.values().begin(), wo.b.values().end(), 0.0);

    Tensor x({1, 3, D}, 0.0);
    for (int t = 0; t < 3; ++t)
        for (int d = 0; d < D; ++d)
            x[static_cast<std::size_t>(t * D + d)] = 0.3 * d - 0.2;  // same row thrice
    Tensor out = models::msa(x, wq, wk, wv, wo, 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out[i] == doctest::Approx(x[i]).epsilon(1e-9));
}

TEST_CASE("eval forward is deterministic; train dropout is not until reseeded") {
    models::Wiin wiin(tiny_config(), 8);
    Tensor x = random_images(2, 52, 9);

    Tensor e1 = wiin.forward(x, Mode::Eval);
    Tensor e2 = wiin.forward(x, Mode::Eval);
    for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e1[i] == e2[i]);

    Tensor t1 = wiin.forward(x, Mode::Train);
    Tensor t2 = wiin.forward(x, Mode::Train);
    bool differs = false;
    for (std::size_t i = 0; i < t1.size(); ++i) differs = differs || t1[i] != t2[i];
    CHECK(differs);  // the dropout stream advanced

    wiin.reseed_dropout(123);
    Tensor r1 = wiin.forward(x, Mode::Train);
    wiin.reseed_dropout(123);
    Tensor r2 = wiin.forward(x, Mode::Train);
    for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i] == r2[i]);
}

TEST_CASE("seeding reproduces parameters") {
    models::Wiin a(tiny_config(), 77), b(tiny_config(), 77), c(tiny_config(), 78);
    auto pa = a.params(), pb = b.params(), pc = c.params();
    REQUIRE(pa.size() == pb.size());
    bool equal = true, differs = false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pa[i].tensor.size(); ++j) {
            if (pa[i].tensor[j] != pb[i].tensor[j]) equal = false;
            if (pa[i].tensor[j] != pc[i].tensor[j]) differs = true;
        }
    CHECK(equal);
    CHECK(differs);
}

TEST_CASE("gradients flow through the whole extractor") {
    models::Wiin wiin(tiny_config(), 10);
    Tensor x = random_images(2, 52, 11);
    Tensor target({2, 2}, {0.2, 0.8, 0.6, 0.4});

    // The token and positional rows start at exactly zero, where layer norm's
    // sqrt(var + eps) is too curved for a +-1e-4 secant; difference at a
    // generic point instead.
    for (const auto& p : wiin.params())
        if (p.name == "wiin.wit.token" || p.name == "wiin.wit.pos") {
            Tensor t = p.tensor;
            auto v = t.values();
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = (i % 2 ? -0.04 : 0.05) + 0.01 * static_cast<double>(i % 7);
        }

    // a handful of representative tensors, a few entries each
    std::vector<std::pair<std::string, Tensor>> probes;
    for (const auto& p : wiin.params()) {
        if (!p.learnable) continue;
        if (p.name.find("stem.conv") != std::string::npos ||
            p.name.find("b2_short") != std::string::npos ||
            p.name.find("collapse") != std::string::npos ||
            p.name.find("token") != std::string::npos ||
            p.name.find("block1.wq") != std::string::npos ||
            p.name.find("mlp") != std::string::npos ||
            p.name.find("image_head") != std::string::npos)
            probes.push_back({p.name, p.tensor});
    }
    REQUIRE(probes.size() >= 5);
    auto r = testutil::grad_check(
        [&]() {
            wiin.reseed_dropout(99);
            return ops::mse_loss(wiin.forward(x, Mode::Train), target);
        },
        probes, 1e-3, 1e-7, 1e-5, 3);
    INFO(r.worst);
    CHECK(r.ok);
    CHECK(r.checked >= 15);
}

TEST_CASE("first principal component rescales to the unit interval") {
    Tensor one({1, 3, 3}, {5, 1, 3, 2, 4, 0, 1.5, 2.5, 3.5});
    int h = 0, w = 0;
    auto pc = models::first_principal_component(one, &h, &w);
    CHECK(h == 3);
    CHECK(w == 3);
    REQUIRE(pc.size() == 9);
    // single channel: plain min-max normalization
    CHECK(pc[5] == 0.0);   // the 0 entry
    CHECK(pc[0] == 1.0);   // the 5 entry
    CHECK(pc[2] == doctest::Approx(3.0 / 5.0).epsilon(1e-12));

    Rng rng(12);
    Tensor multi = Tensor::uniform({1, 4, 5, 5}, rng, -2, 2);  // leading batch accepted
    auto pc2 = models::first_principal_component(multi, &h, &w);
    CHECK(h == 5);
    CHECK(w == 5);
    for (double v : pc2) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(models::first_principal_component(Tensor({2, 3, 4, 4}), &h, &w),
                    DimensionError);
}

TEST_CASE("stage dumps land as one image per stage") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "wiin_stage_dump_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    models::Wiin wiin(WiinConfig{}, 13);
    Tensor x = random_images(1, 100, 14);
    StageCapture capture;
    wiin.forward(x, Mode::Eval, &capture);
    REQUIRE(!capture.empty());
    models::dump_stages(capture, dir.string());

    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".pgm") ++files;
    CHECK(files == capture.size());
    fs::remove_all(dir);
}
