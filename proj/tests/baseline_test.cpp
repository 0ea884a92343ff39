#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "wildfire/data/synthetic.hpp"
#include "wildfire/models/baseline.hpp"
#include "wildfire/ops.hpp"

using namespace wildfire;
using models::BaselineConfig;
using models::BaselineNet;
using models::LossKind;

namespace {

// First `n` rows of a [rows, w] tensor.
Tensor head_rows(const Tensor& t, int n) { return ops::slice(t, 0, 0, n); }
Tensor tail_rows(const Tensor& t, int n) { return ops::slice(t, 0, t.dim(0) - n, n); }

}  // namespace

TEST_CASE("parameter counts match the closed form") {
    for (int d : {20, 14, 22}) {
        BaselineConfig cfg;
        cfg.input_dim = d;
        BaselineNet net(cfg, 1);
        CHECK(net.param_count() == static_cast<std::size_t>(oracle::baseline_param_count(d)));
    }
    BaselineNet w20(BaselineConfig{}, 1);
    CHECK(w20.param_count() == 49705);
    BaselineConfig c14;
    c14.input_dim = 14;
    CHECK(BaselineNet(c14, 1).param_count() == 48169);
    BaselineConfig c22;
    c22.input_dim = 22;
    CHECK(BaselineNet(c22, 1).param_count() == 50217);

    // the classification head swaps the width-1 output for a width-2 one
    BaselineConfig ce;
    ce.loss = LossKind::CrossEntropy;
    CHECK(BaselineNet(ce, 1).param_count() ==
          static_cast<std::size_t>(oracle::baseline_param_count(20) - 5 + 10));
}

TEST_CASE("config validation") {
    BaselineConfig bad;
    bad.input_dim = 0;
    CHECK_THROWS_AS(BaselineNet(bad, 1), ConfigError);
    BaselineConfig empty;
    empty.hidden.clear();
    CHECK_THROWS_AS(BaselineNet(empty, 1), ConfigError);
}

TEST_CASE("forward emits probabilities of the right shape") {
    BaselineConfig cfg;
    cfg.input_dim = 6;
    BaselineNet net(cfg, 3);
    Rng rng(4);
    Tensor x = Tensor::uniform({5, 6}, rng, -1, 1);
    Tensor p = net.forward(x, Mode::Eval);
    CHECK(p.ndim() == 1);
    CHECK(p.dim(0) == 5);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i] > 0.0);
        CHECK(p[i] < 1.0);
    }
    Tensor logits = net.forward_logits(x, Mode::Eval);
    CHECK(logits.dim(0) == 5);
    CHECK(logits.dim(1) == 1);
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(p[i] == doctest::Approx(oracle::sigmoid(logits[i])).epsilon(1e-12));

    CHECK_THROWS_AS(net.forward(Tensor({5, 7}), Mode::Eval), DimensionError);
}

TEST_CASE("classification head squashes with a row softmax") {
    BaselineConfig cfg;
    cfg.input_dim = 6;
    cfg.loss = LossKind::CrossEntropy;
    BaselineNet net(cfg, 3);
    Rng rng(4);
    Tensor x = Tensor::uniform({4, 6}, rng, -1, 1);
    Tensor logits = net.forward_logits(x, Mode::Eval);
    CHECK(logits.dim(1) == 2);
    Tensor p = net.forward(x, Mode::Eval);
    for (int r = 0; r < 4; ++r) {
        const double a = logits[static_cast<std::size_t>(r * 2)];
        const double b = logits[static_cast<std::size_t>(r * 2 + 1)];
        const double want = std::exp(b) / (std::exp(a) + std::exp(b));
        CHECK(p[static_cast<std::size_t>(r)] == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("train mode rejects a single-row batch, eval accepts it") {
    BaselineConfig cfg;
    cfg.input_dim = 4;
    BaselineNet net(cfg, 7);
    Tensor one({1, 4}, 0.25);
    CHECK_THROWS_AS(net.forward(one, Mode::Train), DimensionError);
    CHECK_NOTHROW(net.forward(one, Mode::Eval));
}

TEST_CASE("seeding is reproducible and seeds differ") {
    BaselineConfig cfg;
    cfg.input_dim = 5;
    BaselineNet a(cfg, 42), b(cfg, 42), c(cfg, 43);
    auto pa = a.params(), pb = b.params(), pc = c.params();
    REQUIRE(pa.size() == pb.size());
    bool all_equal = true, any_differs = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].name == pb[i].name);
        for (std::size_t j = 0; j < pa[i].tensor.size(); ++j) {
            if (pa[i].tensor[j] != pb[i].tensor[j]) all_equal = false;
            if (pa[i].tensor[j] != pc[i].tensor[j]) any_differs = true;
        }
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("an all-zero network predicts exactly one half") {
    BaselineConfig cfg;
    cfg.input_dim = 4;
    BaselineNet net(cfg, 9);
    for (auto& p : net.params()) {
        if (p.name.find("run_var") != std::string::npos) continue;  // keep variance 1
        Tensor t = p.tensor;
        std::fill(t.values().begin(), t.values().end(), 0.0);
    }
    Tensor x({3, 4}, {1, -2, 0.5, 3, 0, 0, 1, 1, -1, -1, -1, -1});
    Tensor p = net.forward(x, Mode::Eval);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == 0.5);
}

TEST_CASE("strict decision threshold") {
    CHECK(!models::classify(0.5, 0.5));
    CHECK(models::classify(0.5000001, 0.5));
    CHECK(!models::classify(0.7, 0.7));
    CHECK(models::classify(0.71, 0.7));
}

TEST_CASE("params carry the prefix and the running stats ride along") {
    BaselineConfig cfg;
    cfg.input_dim = 5;
    BaselineNet net(cfg, 2);
    auto params = net.params("m");
    CHECK(params.front().name.rfind("m.", 0) == 0);
    std::size_t learnable_scalars = 0, stat_scalars = 0;
    for (const auto& p : params)
        (p.learnable ? learnable_scalars : stat_scalars) += p.tensor.size();
    CHECK(learnable_scalars == net.param_count());
    // four batch-norm stages, two stat vectors each
    CHECK(stat_scalars == 2 * (256 + 128 + 64 + 32));
}

TEST_CASE("learns a linearly separable task") {
    data::TabularTask task = data::separable_tabular(250, 20, 5);
    REQUIRE(task.x.dim(0) == 250);
    Tensor train_x = head_rows(task.x, 200);
    Tensor test_x = tail_rows(task.x, 50);
    std::vector<int> train_y(task.y.begin(), task.y.begin() + 200);
    std::vector<int> test_y(task.y.begin() + 200, task.y.end());

    BaselineConfig cfg;
    cfg.epochs = 30;
    BaselineNet net(cfg, 11);
    auto stats = models::train_baseline(net, train_x, train_y, test_x, test_y);
    REQUIRE(stats.size() == 30);
    // a freshly initialized logistic head sits near p = 0.5, so the first
    // recorded MSE is near 0.25
    CHECK(stats.front().loss == doctest::Approx(0.25).epsilon(0.25));
    CHECK(stats.back().loss < stats.front().loss);
    CHECK(stats.back().train_acc >= 0.95);
    CHECK(stats.back().test_acc >= 0.9);
    CHECK(models::accuracy(net, test_x, test_y) == stats.back().test_acc);
}

TEST_CASE("the cross-entropy head learns the same task") {
    data::TabularTask task = data::separable_tabular(200, 12, 6);
    Tensor train_x = head_rows(task.x, 160);
    Tensor test_x = tail_rows(task.x, 40);
    std::vector<int> train_y(task.y.begin(), task.y.begin() + 160);
    std::vector<int> test_y(task.y.begin() + 160, task.y.end());

    BaselineConfig cfg;
    cfg.input_dim = 12;
    cfg.loss = LossKind::CrossEntropy;
    cfg.epochs = 30;
    BaselineNet net(cfg, 13);
    auto stats = models::train_baseline(net, train_x, train_y, test_x, test_y);
    CHECK(stats.back().loss < stats.front().loss);
    CHECK(stats.back().train_acc >= 0.95);
    CHECK(stats.back().test_acc >= 0.9);
}

TEST_CASE("training input validation") {
    BaselineConfig cfg;
    cfg.input_dim = 3;
    cfg.epochs = 1;
    BaselineNet net(cfg, 1);
    Tensor x({4, 3}, 0.1);
    CHECK_THROWS_AS(models::train_baseline(net, x, {1, 0, 1}, Tensor(), {}), DimensionError);
    CHECK_THROWS_AS(models::train_baseline(net, x, {1, 1, 1, 1}, Tensor(), {}), DataError);
}

TEST_CASE("a diverging forward pass is reported, not trained through") {
    BaselineConfig cfg;
    cfg.input_dim = 3;
    cfg.epochs = 2;
    BaselineNet net(cfg, 1);
    // a poisoned feature turns the first matmul non-finite on epoch 0
    Tensor x({4, 3}, 0.1);
    x.values()[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(models::train_baseline(net, x, {1, 0, 1, 0}, Tensor(), {}),
                         doctest::Contains("non-finite"), OptimError);
}

TEST_CASE("same seed and data reproduce the identical training log") {
    data::TabularTask task = data::separable_tabular(60, 8, 21);
    BaselineConfig cfg;
    cfg.input_dim = 8;
    cfg.epochs = 5;
    BaselineNet n1(cfg, 33), n2(cfg, 33);
    auto s1 = models::train_baseline(n1, task.x, task.y, Tensor(), {});
    auto s2 = models::train_baseline(n2, task.x, task.y, Tensor(), {});
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].loss == s2[i].loss);  // bitwise: same arithmetic path
        CHECK(s1[i].train_acc == s2[i].train_acc);
    }
}
