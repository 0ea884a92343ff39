#include "wildfire/models/baseline.hpp"

#include <cmath>

namespace wildfire::models {

BaselineNet::BaselineNet(BaselineConfig config, std::uint64_t seed) : config_(std::move(config)) {
    if (config_.input_dim < 1) throw ConfigError("baseline: input_dim must be >= 1");
    if (config_.hidden.empty()) throw ConfigError("baseline: at least one hidden layer");
    Rng rng(Rng::derive(seed, 0));
    int in = config_.input_dim;
    for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
        const int out = config_.hidden[i];
        blocks_.emplace_back(in, out, rng);
        const bool last = (i + 1 == config_.hidden.size());
        if (!last || config_.batchnorm_on_last_hidden) norms_.emplace_back(out);
        in = out;
    }
    const int head_out = config_.loss == LossKind::CrossEntropy ? 2 : 1;
    head_ = nn::Linear(in, head_out, rng);
}

Tensor BaselineNet::forward_logits(const Tensor& batch, Mode mode) {
    if (batch.ndim() != 2 || batch.dim(1) != config_.input_dim)
        throw DimensionError("baseline: expected [B, " + std::to_string(config_.input_dim) +
                             "] input, got " + shape_str(batch.shape()));
    Tensor x = batch;
    std::size_t norm_i = 0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        x = blocks_[i].forward(x);
        const bool last = (i + 1 == blocks_.size());
        if (!last || config_.batchnorm_on_last_hidden) x = norms_[norm_i++].forward(x, mode);
        x = ops::relu(x);
    }
    return head_.forward(x);
}

Tensor BaselineNet::forward(const Tensor& batch, Mode mode) {
    Tensor logits = forward_logits(batch, mode);
    const int B = batch.dim(0);
    if (config_.loss == LossKind::CrossEntropy) {
        Tensor probs = ops::softmax_rows(logits);          // [B, 2]
        Tensor positive = ops::slice(probs, 1, 1, 1);      // [B, 1]
        return ops::reshape(positive, Shape{B});
    }
    return ops::reshape(ops::logistic(logits), Shape{B});
}

std::size_t BaselineNet::param_count() const { return nn::param_count(params()); }

nn::ParamList BaselineNet::params(const std::string& prefix) const {
    nn::ParamList out;
    std::size_t norm_i = 0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const std::string block = prefix + ".block" + std::to_string(i + 1);
        blocks_[i].collect(block + ".linear", out);
        const bool last = (i + 1 == blocks_.size());
        if (!last || config_.batchnorm_on_last_hidden)
            norms_[norm_i++].collect(block + ".bn", out);
    }
    head_.collect(prefix + ".head", out);
    return out;
}

namespace {

Tensor label_tensor(const std::vector<int>& y) {
    std::vector<double> v(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) v[i] = y[i] ? 1.0 : 0.0;
    return Tensor(Shape{static_cast<int>(y.size())}, std::move(v));
}

Tensor onehot_tensor(const std::vector<int>& y) {
    std::vector<double> v(y.size() * 2, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) v[2 * i + (y[i] ? 1 : 0)] = 1.0;
    return Tensor(Shape{static_cast<int>(y.size()), 2}, std::move(v));
}

}  // namespace

std::vector<EpochStats> train_baseline(BaselineNet& net, const Tensor& train_x,
                                       const std::vector<int>& train_y,
                                       const Tensor& test_x,
                                       const std::vector<int>& test_y) {
    if (train_x.ndim() != 2 || static_cast<std::size_t>(train_x.dim(0)) != train_y.size())
        throw DimensionError("train_baseline: features and labels disagree");
    if (train_y.empty()) throw DataError("train_baseline: empty training set");
    bool has_pos = false, has_neg = false;
    for (int y : train_y) (y ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw DataError("train_baseline: both classes required");

    const BaselineConfig& cfg = net.config();
    AdamConfig opt_cfg;
    opt_cfg.learning_rate = cfg.learning_rate;
    opt_cfg.weight_decay = cfg.weight_decay;
    Adam opt(nn::learnable(net.params()), opt_cfg);

    const Tensor target = label_tensor(train_y);
    const Tensor onehot = cfg.loss == LossKind::CrossEntropy ? onehot_tensor(train_y) : Tensor();

    std::vector<EpochStats> log;
    log.reserve(static_cast<std::size_t>(cfg.epochs));
    GradTape tape;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        tape.reset();
        double loss_value = 0.0;
        {
            GradTape::Scope scope(tape);
            Tensor loss;
            if (cfg.loss == LossKind::CrossEntropy) {
                loss = ops::cross_entropy_loss(net.forward_logits(train_x, Mode::Train), onehot);
            } else {
                loss = ops::mse_loss(net.forward(train_x, Mode::Train), target);
            }
            loss_value = loss.item();
            if (!std::isfinite(loss_value))
                throw OptimError("train_baseline: loss diverged at epoch " + std::to_string(epoch));
            tape.backward(loss);
        }
        opt.step();
        EpochStats s;
        s.epoch = epoch;
        s.loss = loss_value;
        s.train_acc = accuracy(net, train_x, train_y);
        s.test_acc = test_y.empty() ? 0.0 : accuracy(net, test_x, test_y);
        log.push_back(s);
    }
    return log;
}

bool classify(double p, double threshold) { return p > threshold; }

double accuracy(BaselineNet& net, const Tensor& x, const std::vector<int>& y, double threshold) {
    if (y.empty()) throw DataError("accuracy: empty evaluation set");
    Tensor probs = net.forward(x, Mode::Eval);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (classify(probs[i], threshold) == (y[i] != 0)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

}  // namespace wildfire::models
