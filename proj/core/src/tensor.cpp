#include "wildfire/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace wildfire {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw DimensionError("shape has non-positive dimension " + shape_str(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill, bool requires_grad)
    : node_(std::make_shared<detail::TensorNode>()) {
    node_->values.assign(shape_numel(shape), fill);
    node_->shape = std::move(shape);
    node_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : node_(std::make_shared<detail::TensorNode>()) {
    if (shape_numel(shape) != values.size())
        throw DimensionError("value count " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(shape));
    node_->shape = std::move(shape);
    node_->values = std::move(values);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double v) { return Tensor(Shape{1}, std::vector<double>{v}); }

Tensor Tensor::uniform(Shape shape, Rng& rng, double lo, double hi, bool requires_grad) {
    Tensor t(std::move(shape), 0.0, requires_grad);
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

int Tensor::dim(int i) const {
    const int n = ndim();
    if (i < 0) i += n;
    if (i < 0 || i >= n) throw DimensionError("axis out of range for " + shape_str(shape()));
    return node_->shape[static_cast<std::size_t>(i)];
}

double Tensor::item() const {
    if (size() != 1) throw DimensionError("item() requires a single-element tensor, got " + shape_str(shape()));
    return node_->values[0];
}

std::span<double> Tensor::grad() {
    if (!has_grad()) throw OptimError("gradient requested but never populated");
    return node_->grad;
}

std::span<const double> Tensor::grad() const {
    if (!has_grad()) throw OptimError("gradient requested but never populated");
    return node_->grad;
}

void Tensor::ensure_grad() {
    if (node_->grad.empty()) node_->grad.assign(node_->values.size(), 0.0);
}

void Tensor::zero_grad() { node_->grad.assign(node_->values.size(), 0.0); }

void Tensor::drop_grad() {
    node_->grad.clear();
    node_->grad.shrink_to_fit();
}

bool Tensor::all_finite() const {
    for (double v : node_->values)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {

std::atomic<std::uint64_t> g_tape_counter{1};
thread_local GradTape* g_current_tape = nullptr;

}  // namespace

GradTape::GradTape() : id_(g_tape_counter.fetch_add(1)) {}

GradTape::~GradTape() = default;

void GradTape::record(std::function<void()> backward_step) {
    steps_.push_back(std::move(backward_step));
}

void GradTape::backward(const Tensor& loss) {
    if (consumed_) throw OptimError("backward called twice on the same tape without reset");
    if (!loss.defined() || loss.size() != 1)
        throw OptimError("backward requires a scalar loss");
    if (loss.node()->tape_id != id_)
        throw OptimError("loss tensor was not produced under this tape");
    consumed_ = true;
    loss.node()->grad.assign(1, 1.0);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

void GradTape::reset() {
    steps_.clear();
    consumed_ = false;
}

GradTape* GradTape::current() { return g_current_tape; }

GradTape::Scope::Scope(GradTape& tape) : prev_(g_current_tape) { g_current_tape = &tape; }

GradTape::Scope::~Scope() { g_current_tape = prev_; }

bool grad_enabled(std::initializer_list<const Tensor*> inputs) {
    if (!GradTape::current()) return false;
    for (const Tensor* t : inputs)
        if (t && t->defined() && t->requires_grad()) return true;
    return false;
}

void record_op(Tensor& out, std::function<void()> backward_step) {
    GradTape* tape = GradTape::current();
    out.set_requires_grad(true);
    out.node()->tape_id = tape->id();
    tape->record(std::move(backward_step));
}

}  // namespace wildfire
