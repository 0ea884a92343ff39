#include "wildfire/models/hybrid.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "wildfire/adam.hpp"

namespace wildfire::models {
namespace {

// Copies the listed rows of a [N, ...] tensor into a fresh [idx.size(), ...]
// tensor (plain data movement, not recorded on the tape).
Tensor take_rows(const Tensor& t, const std::vector<std::size_t>& idx) {
    Shape shape = t.shape();
    shape[0] = static_cast<int>(idx.size());
    Tensor out(shape);
    const std::size_t row = t.size() / t.dim(0);
    auto src = t.values();
    auto dst = out.values();
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < row; ++j)
            dst[r * row + j] = src[idx[r] * row + j];
    return out;
}

Tensor label_tensor(const std::vector<int>& y) {
    Tensor t(Shape{static_cast<int>(y.size())});
    auto v = t.values();
    for (std::size_t i = 0; i < y.size(); ++i) v[i] = y[i];
    return t;
}

Tensor onehot_tensor(const std::vector<int>& y) {
    Tensor t(Shape{static_cast<int>(y.size()), 2}, 0.0);
    auto v = t.values();
    for (std::size_t i = 0; i < y.size(); ++i) v[2 * i + (y[i] ? 1 : 0)] = 1.0;
    return t;
}

void check_binary_labels(const std::vector<int>& y, const char* what) {
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] != 0 && y[i] != 1)
            throw DataError(std::string(what) + " label at index " +
                            std::to_string(i) + " is " + std::to_string(y[i]) +
                            ", expected 0 or 1");
}

}  // namespace

HybridModel::HybridModel(HybridConfig config, std::uint64_t seed)
    : config_(config),
      wiin_(config.wiin, Rng::derive(seed, 10)) {
    BaselineConfig head_cfg;
    head_cfg.input_dim = config.tabular_width + 2;
    head_cfg.loss = config.loss;
    head_cfg.learning_rate = config.learning_rate;
    head_cfg.weight_decay = config.weight_decay;
    head_cfg.epochs = config.epochs;
    head_ = BaselineNet(head_cfg, Rng::derive(seed, 11));
}

Tensor HybridModel::fuse_features(const Tensor& tabular, const Tensor& wiin_out) const {
    if (tabular.ndim() != 2 || tabular.dim(1) != config_.tabular_width)
        throw DimensionError("hybrid: tabular block is " + shape_str(tabular.shape()) +
                             ", expected [B, " + std::to_string(config_.tabular_width) + "]");
    if (wiin_out.ndim() != 2 || wiin_out.dim(1) != 2)
        throw DimensionError("hybrid: imagery features are " + shape_str(wiin_out.shape()) +
                             ", expected [B, 2]");
    if (tabular.dim(0) != wiin_out.dim(0))
        throw DimensionError("hybrid: tabular batch " + std::to_string(tabular.dim(0)) +
                             " vs imagery batch " + std::to_string(wiin_out.dim(0)));
    return ops::concat({tabular, wiin_out}, 1);
}

Tensor HybridModel::forward(const Tensor& tabular, const Tensor& images, Mode mode) {
    return head_.forward(fuse_features(tabular, wiin_.forward(images, mode)), mode);
}

Tensor HybridModel::forward_logits(const Tensor& tabular, const Tensor& images, Mode mode) {
    return head_.forward_logits(fuse_features(tabular, wiin_.forward(images, mode)), mode);
}

std::size_t HybridModel::param_count() const {
    return wiin_.param_count() + head_.param_count();
}

nn::ParamList HybridModel::params(const std::string& prefix) const {
    nn::ParamList out = wiin_.params(prefix + ".wiin");
    nn::ParamList head = head_.params(prefix + ".head");
    out.insert(out.end(), head.begin(), head.end());
    return out;
}

HybridEval evaluate_hybrid(HybridModel& model, const Tensor& tabular,
                           const Tensor& images, const std::vector<int>& labels) {
    const std::size_t n = labels.size();
    if (tabular.dim(0) != static_cast<int>(n) || images.dim(0) != static_cast<int>(n))
        throw DimensionError("hybrid eval: " + std::to_string(n) + " labels vs " +
                             std::to_string(tabular.dim(0)) + " tabular rows and " +
                             std::to_string(images.dim(0)) + " images");
    check_binary_labels(labels, "eval");

    HybridEval eval;
    eval.scores.reserve(n);
    const std::size_t chunk = 64;
    std::vector<int> predicted(n);
    for (std::size_t at = 0; at < n; at += chunk) {
        const std::size_t len = std::min(chunk, n - at);
        std::vector<std::size_t> idx(len);
        std::iota(idx.begin(), idx.end(), at);
        Tensor probs = model.forward(take_rows(tabular, idx), take_rows(images, idx),
                                     Mode::Eval);
        auto pv = probs.values();
        for (std::size_t i = 0; i < len; ++i) {
            eval.scores.push_back(pv[i]);
            predicted[at + i] = classify(pv[i], model.config().threshold) ? 1 : 0;
        }
    }
    eval.confusion = metrics::confusion(labels, predicted);
    return eval;
}

HybridLog train_hybrid(HybridModel& model, const Tensor& train_tabular,
                       const Tensor& train_images,
                       const std::vector<int>& train_labels,
                       const Tensor& test_tabular, const Tensor& test_images,
                       const std::vector<int>& test_labels, std::uint64_t seed) {
    const HybridConfig& cfg = model.config();
    const std::size_t n = train_labels.size();
    if (train_tabular.ndim() != 2 || train_tabular.dim(0) != static_cast<int>(n) ||
        train_images.dim(0) != static_cast<int>(n))
        throw DimensionError("hybrid train: " + std::to_string(n) + " labels vs " +
                             std::to_string(train_tabular.dim(0)) + " tabular rows and " +
                             std::to_string(train_images.dim(0)) + " images");
    if (n < 2) throw DataError("hybrid train: needs at least two rows");
    check_binary_labels(train_labels, "train");
    const long long positives = std::accumulate(train_labels.begin(), train_labels.end(), 0LL);
    if (positives == 0 || positives == static_cast<long long>(n))
        throw DataError("hybrid train: training labels are single-class");
    if (cfg.batch_size < 2)
        throw ConfigError("hybrid train: batch size must be at least 2, got " +
                          std::to_string(cfg.batch_size));

    std::vector<Tensor> learnable = nn::learnable(model.params());
    AdamConfig opt_cfg;
    opt_cfg.learning_rate = cfg.learning_rate;
    opt_cfg.weight_decay = cfg.weight_decay;
    Adam opt(learnable, opt_cfg);

    Rng shuffle_rng(Rng::derive(seed, 20));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    HybridLog log;
    GradTape tape;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        // Consecutive chunks of batch_size; a lone trailing row joins the
        // previous batch (batch norm needs two rows to define a variance).
        std::vector<std::pair<std::size_t, std::size_t>> batches;
        for (std::size_t at = 0; at < n; at += cfg.batch_size)
            batches.push_back({at, std::min(n - at, static_cast<std::size_t>(cfg.batch_size))});
        if (batches.size() > 1 && batches.back().second == 1) {
            batches.pop_back();
            batches.back().second += 1;
        }

        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            auto [at, len] = batches[b];
            std::vector<std::size_t> idx(order.begin() + at, order.begin() + at + len);
            Tensor bt = take_rows(train_tabular, idx);
            Tensor bi = take_rows(train_images, idx);
            std::vector<int> by(len);
            for (std::size_t i = 0; i < len; ++i) by[i] = train_labels[idx[i]];

            tape.reset();
            GradTape::Scope scope(tape);
            Tensor loss = cfg.loss == LossKind::CrossEntropy
                              ? ops::cross_entropy_loss(
                                    model.forward_logits(bt, bi, Mode::Train),
                                    onehot_tensor(by))
                              : ops::mse_loss(model.forward(bt, bi, Mode::Train),
                                              label_tensor(by));
            const double loss_value = loss.item();
            if (!std::isfinite(loss_value))
                throw OptimError("hybrid training diverged at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(b));
            log.batches.push_back({epoch, static_cast<int>(b),
                                   epoch + static_cast<double>(b) / batches.size(),
                                   loss_value});
            epoch_loss += loss_value;

            tape.backward(loss);
            opt.step();
        }

        HybridEpochStats stats;
        stats.epoch = epoch;
        stats.loss = epoch_loss / batches.size();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        stats.test_acc = nan;
        stats.tpr = nan;
        stats.tnr = nan;
        if (!test_labels.empty()) {
            HybridEval eval = evaluate_hybrid(model, test_tabular, test_images, test_labels);
            metrics::Rates r = metrics::rates(eval.confusion);
            stats.test_acc = r.accuracy.value_or(nan);
            stats.tpr = r.tpr.value_or(nan);
            stats.tnr = r.tnr.value_or(nan);
        }
        log.epochs.push_back(stats);

        if (cfg.stop_accuracy > 0.0 && stats.test_acc >= cfg.stop_accuracy &&
            stats.tpr >= cfg.stop_rate && stats.tnr >= cfg.stop_rate)
            break;
    }
    return log;
}

}  // namespace wildfire::models
