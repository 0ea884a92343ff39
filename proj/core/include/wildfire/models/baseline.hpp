#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wildfire/adam.hpp"
#include "wildfire/nn.hpp"

namespace wildfire::models {

enum class LossKind { Mse, CrossEntropy };

struct BaselineConfig {
    int input_dim = 20;
    std::vector<int> hidden = {256, 128, 64, 32, 4};
    bool batchnorm_on_last_hidden = false;  // the width-4 block has no norm by default
    LossKind loss = LossKind::Mse;
    double learning_rate = 0.01;
    double weight_decay = 1e-4;
    int epochs = 100;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;       // training loss before this epoch's update
    double train_acc = 0.0;  // evaluated after the update
    double test_acc = 0.0;   // 0 when no test split was supplied
};

// Fully connected tabular network: five hidden blocks (linear -> batch norm
// on the first four -> ReLU), then a linear head. The regression head (MSE)
// emits one logit squashed by the logistic function; the classification head
// (cross-entropy) emits two logits whose softmax gives the positive-class
// probability.
class BaselineNet {
public:
    BaselineNet() = default;
    BaselineNet(BaselineConfig config, std::uint64_t seed);

    // batch: [B, input_dim] -> probabilities [B] in (0, 1).
    Tensor forward(const Tensor& batch, Mode mode);

    // Pre-squash head output: [B, 1] for the MSE head, [B, 2] for the
    // cross-entropy head. Training losses consume this directly.
    Tensor forward_logits(const Tensor& batch, Mode mode);

    std::size_t param_count() const;
    nn::ParamList params(const std::string& prefix = "baseline") const;
    const BaselineConfig& config() const { return config_; }

private:
    BaselineConfig config_;
    std::vector<nn::Linear> blocks_;
    std::vector<nn::BatchNorm> norms_;  // one per normalized block
    nn::Linear head_;
};

// Full-batch Adam training on the network's configured loss. The per-epoch
// loss is the value seen before that epoch's parameter update, so entry 0
// reflects the freshly initialized network. Throws OptimError with the epoch
// index if the loss turns non-finite.
std::vector<EpochStats> train_baseline(BaselineNet& net, const Tensor& train_x,
                                       const std::vector<int>& train_y,
                                       const Tensor& test_x,
                                       const std::vector<int>& test_y);

// Strict-threshold decision rule: true iff p > threshold.
bool classify(double p, double threshold = 0.5);

// Fraction of rows the strict 0.5 rule gets right, in eval mode.
double accuracy(BaselineNet& net, const Tensor& x, const std::vector<int>& y,
                double threshold = 0.5);

}  // namespace wildfire::models
