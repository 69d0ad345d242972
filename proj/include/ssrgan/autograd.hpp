#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ssrgan/tensor.hpp"

namespace ssrgan {

/// One node of the reverse-mode computation graph. Leaves are parameters
/// (requires_grad, named) or constants; interior nodes cache their forward
/// value and know how to push their gradient into their inputs.
///
/// Gradients accumulate: backward() called twice without zero_grad() adds.
template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad; // allocated on demand, same shape as value
    bool requires_grad = false;
    std::string name; // nonempty for parameters only
    std::vector<std::shared_ptr<Node<T>>> inputs;
    // reads `upstream` (= this node's grad) and accumulates into inputs
    std::function<void(const Tensor<T>& upstream)> backprop;

    void ensure_grad() {
        if (grad.size() != value.size()) grad = Tensor<T>::zeros(value.shape());
    }
    void zero_grad() {
        if (grad.size() == value.size())
            std::fill(grad.values().begin(), grad.values().end(), T(0));
    }
    void accumulate(const Tensor<T>& g) {
        ensure_grad();
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
    }
};

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
NodePtr<T> make_constant(Tensor<T> value);

template <typename T>
NodePtr<T> make_parameter(Tensor<T> value, std::string name);

/// Leaf sharing `a`'s value with the gradient path cut.
template <typename T>
NodePtr<T> detach(const NodePtr<T>& a);

// ---- differentiable ops (exact shape match, no broadcasting) ----

template <typename T>
NodePtr<T> add(const NodePtr<T>& a, const NodePtr<T>& b);
template <typename T>
NodePtr<T> sub(const NodePtr<T>& a, const NodePtr<T>& b);
template <typename T>
NodePtr<T> mul(const NodePtr<T>& a, const NodePtr<T>& b);
template <typename T>
NodePtr<T> scalar_mul(T c, const NodePtr<T>& a);
template <typename T>
NodePtr<T> scalar_add(T c, const NodePtr<T>& a);

/// Scalar-valued reductions; result shape (1).
template <typename T>
NodePtr<T> sum(const NodePtr<T>& a);
template <typename T>
NodePtr<T> mean(const NodePtr<T>& a);

/// Mean squared error over all elements; gradient w.r.t. a is 2(a-b)/N.
template <typename T>
NodePtr<T> mse(const NodePtr<T>& a, const NodePtr<T>& b);

// ---- activations ----

/// max(x,0) + slope*min(x,0) with fixed slope; derivative at x == 0 is 0.
template <typename T>
NodePtr<T> leaky_relu(const NodePtr<T>& x, T slope);
/// PReLU with a learnable scalar slope node (shape (1)).
template <typename T>
NodePtr<T> prelu(const NodePtr<T>& x, const NodePtr<T>& slope);
template <typename T>
NodePtr<T> tanh_op(const NodePtr<T>& x);
template <typename T>
NodePtr<T> sigmoid_op(const NodePtr<T>& x);

/// Reverse topological sweep from a scalar root; accumulates dRoot/dtheta
/// into the grad slot of every reachable node with requires_grad.
template <typename T>
void backward(const NodePtr<T>& root);

/// Zeroes the grad slots of the given parameter set.
template <typename T>
void zero_grads(const std::vector<NodePtr<T>>& params);

/// Scoped requires_grad suppression: graphs built (and walked) inside the
/// scope skip gradient work for these parameters. Used to freeze the
/// discriminator during the generator update.
template <typename T>
class FreezeParams {
public:
    explicit FreezeParams(std::vector<NodePtr<T>> params) : params_(std::move(params)) {
        for (auto& p : params_) p->requires_grad = false;
    }
    ~FreezeParams() {
        for (auto& p : params_) p->requires_grad = true;
    }
    FreezeParams(const FreezeParams&) = delete;
    FreezeParams& operator=(const FreezeParams&) = delete;

private:
    std::vector<NodePtr<T>> params_;
};

} // namespace ssrgan
