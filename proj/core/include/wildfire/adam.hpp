#pragma once

#include <cstdint>
#include <vector>

#include "wildfire/tensor.hpp"

namespace wildfire {

struct AdamConfig {
    double learning_rate = 0.01;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction plus decoupled weight decay: after the Adam
// update itself, lr * wd * param is subtracted. step() clears the gradients
// it consumed so the next backward starts from zero.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig config);

    void step();
    std::uint64_t step_count() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    AdamConfig config_;
    std::uint64_t t_ = 0;
};

}  // namespace wildfire
