#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wildfire/metrics.hpp"
#include "wildfire/models/baseline.hpp"
#include "wildfire/models/wiin.hpp"

namespace wildfire::models {

struct HybridConfig {
    int tabular_width = 20;
    WiinConfig wiin;
    LossKind loss = LossKind::Mse;
    double learning_rate = 0.01;
    double weight_decay = 1e-4;
    int epochs = 100;
    int batch_size = 32;
    double threshold = 0.5;
    // Optional early stop: once test accuracy reaches stop_accuracy AND both
    // TPR and TNR reach stop_rate, training ends after logging that epoch.
    // Zero disables the check.
    double stop_accuracy = 0.0;
    double stop_rate = 0.0;
};

struct HybridEpochStats {
    int epoch = 0;
    double loss = 0.0;      // mean of this epoch's batch losses (pre-update)
    double test_acc = 0.0;
    double tpr = 0.0;       // NaN when the test split lacks positives
    double tnr = 0.0;       // NaN when the test split lacks negatives
};

struct HybridBatchStats {
    int epoch = 0;
    int batch = 0;
    double step = 0.0;  // epoch + batch/batches_per_epoch, for plotting
    double loss = 0.0;
};

struct HybridLog {
    std::vector<HybridEpochStats> epochs;
    std::vector<HybridBatchStats> batches;
};

// The imagery extractor feeding the tabular head: each image contributes a
// token feature and an image feature, appended to the tabular row, and the
// widened rows run through the fully connected network.
class HybridModel {
public:
    HybridModel() = default;
    HybridModel(HybridConfig config, std::uint64_t seed);

    // tabular: [B, tabular_width], wiin_out: [B, 2] ->
    // [B, tabular_width + 2] with columns [tabular..., token, image].
    Tensor fuse_features(const Tensor& tabular, const Tensor& wiin_out) const;

    // tabular: [B, tabular_width], images: [B, 1, hw, hw] -> probabilities [B].
    Tensor forward(const Tensor& tabular, const Tensor& images, Mode mode);
    Tensor forward_logits(const Tensor& tabular, const Tensor& images, Mode mode);

    std::size_t param_count() const;
    nn::ParamList params(const std::string& prefix = "hybrid") const;
    const HybridConfig& config() const { return config_; }
    Wiin& wiin() { return wiin_; }
    BaselineNet& head() { return head_; }

private:
    HybridConfig config_;
    Wiin wiin_;
    BaselineNet head_;
};

struct HybridEval {
    metrics::ConfusionMatrix confusion;
    std::vector<double> scores;  // per-row probabilities, input order
};

// Eval-mode scoring over the whole set (chunked internally so activation
// memory stays bounded).
HybridEval evaluate_hybrid(HybridModel& model, const Tensor& tabular,
                           const Tensor& images, const std::vector<int>& labels);

// Mini-batch Adam on the configured loss. Batches are drawn from a fresh
// shuffle each epoch (derived from `seed`); a size-1 tail is folded into the
// previous batch so batch norm always sees at least two rows. Batch losses
// are the pre-update values. Throws OptimError naming epoch and batch if the
// loss turns non-finite.
HybridLog train_hybrid(HybridModel& model, const Tensor& train_tabular,
                       const Tensor& train_images,
                       const std::vector<int>& train_labels,
                       const Tensor& test_tabular, const Tensor& test_images,
                       const std::vector<int>& test_labels, std::uint64_t seed);

}  // namespace wildfire::models
