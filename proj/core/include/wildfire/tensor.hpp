#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wildfire/error.hpp"
#include "wildfire/rng.hpp"

namespace wildfire {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorNode {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until backward touches this node
    bool requires_grad = false;
    std::uint64_t tape_id = 0;  // tape that recorded the op producing this node
};

}  // namespace detail

// Dense row-major tensor of 64-bit reals. Copying a Tensor copies the handle,
// not the storage; ops treat their outputs as written-once.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor scalar(double v);
    static Tensor uniform(Shape shape, Rng& rng, double lo, double hi,
                          bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int ndim() const { return static_cast<int>(node_->shape.size()); }
    int dim(int i) const;  // negative i counts from the back
    std::size_t size() const { return node_->values.size(); }

    std::span<const double> values() const { return node_->values; }
    std::span<double> values() { return node_->values; }
    const double& operator[](std::size_t i) const { return node_->values[i]; }
    double& operator[](std::size_t i) { return node_->values[i]; }

    // Value of a single-element tensor.
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool b) { node_->requires_grad = b; }

    bool has_grad() const { return node_ && !node_->grad.empty(); }
    std::span<double> grad();
    std::span<const double> grad() const;
    void ensure_grad();   // allocate zero-filled grad if absent
    void zero_grad();     // allocate if needed, then fill with zeros
    void drop_grad();     // release the grad buffer entirely

    // All entries finite? Forward ops use this to refuse NaN/Inf states.
    bool all_finite() const;

    detail::TensorNode* node() const { return node_.get(); }
    const std::shared_ptr<detail::TensorNode>& shared_node() const { return node_; }

private:
    std::shared_ptr<detail::TensorNode> node_;
};

// Reverse-mode tape. Ops append a backward closure per recorded operation;
// backward() replays them last-to-first, which visits nodes in reverse
// topological order because the forward pass appended in topological order.
class GradTape {
public:
    GradTape();
    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;
    ~GradTape();

    void record(std::function<void()> backward_step);
    std::size_t op_count() const { return steps_.size(); }
    std::uint64_t id() const { return id_; }

    // Populates grads of every requires_grad tensor that fed the loss.
    // Throws OptimError on a non-scalar loss, a loss not produced under
    // this tape, or a second call without reset().
    void backward(const Tensor& loss);
    void reset();

    // Innermost active tape on this thread, or nullptr outside any scope.
    static GradTape* current();

    // RAII activation. Ops only record while a scope is alive.
    class Scope {
    public:
        explicit Scope(GradTape& tape);
        ~Scope();
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        GradTape* prev_;
    };

private:
    std::vector<std::function<void()>> steps_;
    bool consumed_ = false;
    std::uint64_t id_;
};

// True when a tape is active and any listed tensor wants gradients; callers
// use it to decide whether an op output participates in autodiff.
bool grad_enabled(std::initializer_list<const Tensor*> inputs);

// Marks `out` as produced by the current tape and registers the closure.
void record_op(Tensor& out, std::function<void()> backward_step);

}  // namespace wildfire
