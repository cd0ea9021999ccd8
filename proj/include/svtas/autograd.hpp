#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "svtas/tensor.hpp"

// Minimal tape-free reverse-mode differentiation over coarse tensor ops.
//
// Every op returns a Var whose node remembers its parents and a closure that
// pushes the node's gradient into them. backward() walks the graph in reverse
// topological order. Graph memory is released when the last Var referencing it
// goes away, so each streaming step starts from an empty graph.

namespace svtas::ag {

template <class T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    Tensor<T>& grad_buffer() {
        if (grad.shape() != value.shape()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

template <class T>
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

    static Var constant(Tensor<T> value) {
        auto n = std::make_shared<Node<T>>();
        n->value = std::move(value);
        return Var(std::move(n));
    }
    static Var parameter(Tensor<T> value) {
        auto n = std::make_shared<Node<T>>();
        n->value = std::move(value);
        n->requires_grad = true;
        return Var(std::move(n));
    }

    bool defined() const noexcept { return node_ != nullptr; }
    const Tensor<T>& value() const { return node_->value; }
    Tensor<T>& mutable_value() { return node_->value; }
    const Shape& shape() const { return node_->value.shape(); }
    std::size_t dim(std::size_t i) const { return node_->value.dim(i); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const Tensor<T>& grad() const { return node_->grad_buffer(); }
    Tensor<T>& mutable_grad() { return node_->grad_buffer(); }
    void zero_grad() {
        if (node_) node_->grad_buffer().fill(T(0));
    }
    // A constant holding the same value, cut from the graph.
    Var detached() const { return constant(node_->value); }
    const std::shared_ptr<Node<T>>& node() const { return node_; }

private:
    std::shared_ptr<Node<T>> node_;
};

// While alive, ops on this thread produce constants and record nothing.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

// Builds the result node of an op. The closure is dropped when gradients are
// disabled or no parent needs one.
template <class T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> backward_fn);

// Seeds d(root)/d(root) = 1 for a single-element root and accumulates into
// every reachable node that requires a gradient.
template <class T>
void backward(const Var<T>& root);

template <class T> Var<T> matmul(const Var<T>& a, const Var<T>& b);
// x[n,in] * w[in,out] + bias[out]
template <class T> Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& bias);
template <class T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> scale(const Var<T>& a, T factor);
template <class T> Var<T> relu(const Var<T>& a);
template <class T> Var<T> gelu(const Var<T>& a);

// x[N,H,W,C] with weight [k,k,C,Co] and bias [Co].
template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, std::size_t stride,
              std::size_t pad);

// Causal temporal shift on x[N,H,W,C]: channels [0, shifted) of frame t take
// frame t-1's values; frame 0 takes `carry` [H,W,shifted].
template <class T>
Var<T> temporal_shift(const Var<T>& x, const Tensor<T>& carry, std::size_t shifted);

// Dilated causal convolution of x[n,ci] left-padded by `history`
// [dilation*(k-1), ci]; weight [k,ci,co], bias [co].
template <class T>
Var<T> causal_conv1d(const Var<T>& x, const Tensor<T>& history, const Var<T>& weight,
                     const Var<T>& bias, std::size_t dilation);

// x[N,H,W,C] -> [N,C] mean over the spatial positions.
template <class T> Var<T> spatial_mean(const Var<T>& x);
template <class T> Var<T> concat_cols(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> concat_rows(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> reverse_rows(const Var<T>& a);
template <class T> Var<T> gather_rows(const Var<T>& a, std::span<const std::size_t> rows);
template <class T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-5));
template <class T> Var<T> embedding(std::span<const int> ids, const Var<T>& table);

// Masked (causal) multi-head self-attention over `batch` sequences of `length`
// tokens. qkv is [batch*length, 3*d] with q, k, v blocks side by side.
template <class T>
Var<T> causal_attention(const Var<T>& qkv, std::size_t batch, std::size_t length,
                        std::size_t heads);

// Throws NormalizationError for an all-zero row.
template <class T> Var<T> l2_normalize_rows(const Var<T>& x);

} // namespace svtas::ag
