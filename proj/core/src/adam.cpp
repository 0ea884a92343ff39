#include "wildfire/adam.hpp"

#include <cmath>

namespace wildfire {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    if (config_.learning_rate <= 0.0) throw ConfigError("adam: learning rate must be positive");
    if (config_.weight_decay < 0.0) throw ConfigError("adam: weight decay must be non-negative");
    if (config_.beta1 <= 0.0 || config_.beta1 >= 1.0 || config_.beta2 <= 0.0 || config_.beta2 >= 1.0)
        throw ConfigError("adam: betas must lie in (0, 1)");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    for (const Tensor& p : params_)
        if (!p.has_grad())
            throw OptimError("adam: step called before gradients were populated");
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        auto g = p.grad();
        std::vector<double>& m = m_[pi];
        std::vector<double>& v = v_[pi];
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
            p[i] -= config_.learning_rate * config_.weight_decay * p[i];
        }
        p.zero_grad();
    }
}

}  // namespace wildfire
