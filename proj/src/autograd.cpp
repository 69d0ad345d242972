#include "ssrgan/autograd.hpp"

#include <algorithm>
#include <unordered_set>

#include "ssrgan/errors.hpp"

namespace ssrgan {

namespace {

template <typename T>
NodePtr<T> make_op(Tensor<T> value, std::vector<NodePtr<T>> inputs,
                   std::function<void(const Tensor<T>&)> backprop) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->inputs = std::move(inputs);
    for (const auto& in : node->inputs)
        if (in->requires_grad) node->requires_grad = true;
    if (node->requires_grad) node->backprop = std::move(backprop);
    return node;
}

} // namespace

template <typename T>
NodePtr<T> make_constant(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    return node;
}

template <typename T>
NodePtr<T> make_parameter(Tensor<T> value, std::string name) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->requires_grad = true;
    node->name = std::move(name);
    return node;
}

template <typename T>
NodePtr<T> detach(const NodePtr<T>& a) {
    return make_constant(a->value);
}

template <typename T>
NodePtr<T> add(const NodePtr<T>& a, const NodePtr<T>& b) {
    check_same_shape(a->value, b->value, "add");
    return make_op<T>(add(a->value, b->value), {a, b}, [a, b](const Tensor<T>& up) {
        if (a->requires_grad) a->accumulate(up);
        if (b->requires_grad) b->accumulate(up);
    });
}

template <typename T>
NodePtr<T> sub(const NodePtr<T>& a, const NodePtr<T>& b) {
    check_same_shape(a->value, b->value, "sub");
    return make_op<T>(sub(a->value, b->value), {a, b}, [a, b](const Tensor<T>& up) {
        if (a->requires_grad) a->accumulate(up);
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < up.size(); ++i) b->grad[i] -= up[i];
        }
    });
}

template <typename T>
NodePtr<T> mul(const NodePtr<T>& a, const NodePtr<T>& b) {
    check_same_shape(a->value, b->value, "mul");
    return make_op<T>(mul(a->value, b->value), {a, b}, [a, b](const Tensor<T>& up) {
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < up.size(); ++i) a->grad[i] += up[i] * b->value[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < up.size(); ++i) b->grad[i] += up[i] * a->value[i];
        }
    });
}

template <typename T>
NodePtr<T> scalar_mul(T c, const NodePtr<T>& a) {
    return make_op<T>(scalar_mul(c, a->value), {a}, [a, c](const Tensor<T>& up) {
        a->ensure_grad();
        for (std::size_t i = 0; i < up.size(); ++i) a->grad[i] += c * up[i];
    });
}

template <typename T>
NodePtr<T> scalar_add(T c, const NodePtr<T>& a) {
    return make_op<T>(scalar_add(c, a->value), {a},
                      [a](const Tensor<T>& up) { a->accumulate(up); });
}

template <typename T>
NodePtr<T> sum(const NodePtr<T>& a) {
    Tensor<T> value(Shape{1});
    value[0] = sum(a->value);
    return make_op<T>(std::move(value), {a}, [a](const Tensor<T>& up) {
        a->ensure_grad();
        for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += up[0];
    });
}

template <typename T>
NodePtr<T> mean(const NodePtr<T>& a) {
    if (a->value.empty()) throw ShapeError("mean of empty tensor");
    Tensor<T> value(Shape{1});
    value[0] = mean(a->value);
    const T inv_n = T(1) / static_cast<T>(a->value.size());
    return make_op<T>(std::move(value), {a}, [a, inv_n](const Tensor<T>& up) {
        a->ensure_grad();
        for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += up[0] * inv_n;
    });
}

template <typename T>
NodePtr<T> mse(const NodePtr<T>& a, const NodePtr<T>& b) {
    check_same_shape(a->value, b->value, "mse");
    if (a->value.empty()) throw ShapeError("mse of empty tensors");
    Tensor<T> value(Shape{1});
    value[0] = mse(a->value, b->value);
    const T two_over_n = T(2) / static_cast<T>(a->value.size());
    return make_op<T>(std::move(value), {a, b}, [a, b, two_over_n](const Tensor<T>& up) {
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad[i] += up[0] * two_over_n * (a->value[i] - b->value[i]);
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < b->grad.size(); ++i)
                b->grad[i] -= up[0] * two_over_n * (a->value[i] - b->value[i]);
        }
    });
}

template <typename T>
NodePtr<T> leaky_relu(const NodePtr<T>& x, T slope) {
    Tensor<T> value(x->value.shape());
    for (std::size_t i = 0; i < value.size(); ++i) {
        T v = x->value[i];
        value[i] = v > T(0) ? v : slope * v;
    }
    return make_op<T>(std::move(value), {x}, [x, slope](const Tensor<T>& up) {
        x->ensure_grad();
        for (std::size_t i = 0; i < up.size(); ++i) {
            T v = x->value[i];
            if (v > T(0))
                x->grad[i] += up[i];
            else if (v < T(0))
                x->grad[i] += slope * up[i];
            // derivative at the kink is defined as 0
        }
    });
}

template <typename T>
NodePtr<T> prelu(const NodePtr<T>& x, const NodePtr<T>& slope) {
    if (slope->value.size() != 1) throw ShapeError("prelu slope must be a scalar tensor");
    const T a = slope->value[0];
    Tensor<T> value(x->value.shape());
    for (std::size_t i = 0; i < value.size(); ++i) {
        T v = x->value[i];
        value[i] = v > T(0) ? v : a * v;
    }
    return make_op<T>(std::move(value), {x, slope}, [x, slope, a](const Tensor<T>& up) {
        if (x->requires_grad) {
            x->ensure_grad();
            for (std::size_t i = 0; i < up.size(); ++i) {
                T v = x->value[i];
                if (v > T(0))
                    x->grad[i] += up[i];
                else if (v < T(0))
                    x->grad[i] += a * up[i];
            }
        }
        if (slope->requires_grad) {
            slope->ensure_grad();
            T acc = T(0);
            for (std::size_t i = 0; i < up.size(); ++i) {
                T v = x->value[i];
                if (v < T(0)) acc += up[i] * v;
            }
            slope->grad[0] += acc;
        }
    });
}

template <typename T>
NodePtr<T> tanh_op(const NodePtr<T>& x) {
    Tensor<T> value(x->value.shape());
    for (std::size_t i = 0; i < value.size(); ++i) value[i] = std::tanh(x->value[i]);
    auto node = make_op<T>(std::move(value), {x}, nullptr);
    if (node->requires_grad) {
        // raw self pointer: the lambda is owned by the node, so it can only
        // run while the node is alive; a shared_ptr capture would be a cycle
        Node<T>* self = node.get();
        node->backprop = [x, self](const Tensor<T>& up) {
            x->ensure_grad();
            for (std::size_t i = 0; i < up.size(); ++i) {
                T y = self->value[i];
                x->grad[i] += up[i] * (T(1) - y * y);
            }
        };
    }
    return node;
}

template <typename T>
NodePtr<T> sigmoid_op(const NodePtr<T>& x) {
    Tensor<T> value(x->value.shape());
    for (std::size_t i = 0; i < value.size(); ++i)
        value[i] = T(1) / (T(1) + std::exp(-x->value[i]));
    auto node = make_op<T>(std::move(value), {x}, nullptr);
    if (node->requires_grad) {
        Node<T>* self = node.get();
        node->backprop = [x, self](const Tensor<T>& up) {
            x->ensure_grad();
            for (std::size_t i = 0; i < up.size(); ++i) {
                T y = self->value[i];
                x->grad[i] += up[i] * y * (T(1) - y);
            }
        };
    }
    return node;
}

template <typename T>
void backward(const NodePtr<T>& root) {
    if (!root) throw ContractError("backward: null root");
    if (root->value.size() != 1)
        throw ContractError("backward requires a scalar root, got shape " +
                            shape_str(root->value.shape()));

    // iterative post-order DFS over grad-requiring nodes
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> visited;
    std::vector<std::pair<Node<T>*, std::size_t>> stack;
    if (root->requires_grad) {
        stack.emplace_back(root.get(), 0);
        visited.insert(root.get());
    }
    while (!stack.empty()) {
        auto [node, next_input] = stack.back();
        if (next_input < node->inputs.size()) {
            ++stack.back().second;
            Node<T>* in = node->inputs[next_input].get();
            if (in->requires_grad && !visited.count(in)) {
                visited.insert(in);
                stack.emplace_back(in, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* node = *it;
        if (node->backprop) {
            node->ensure_grad();
            node->backprop(node->grad);
        }
    }
}

template <typename T>
void zero_grads(const std::vector<NodePtr<T>>& params) {
    for (const auto& p : params) p->zero_grad();
}

#define SSRGAN_INSTANTIATE_AUTOGRAD(T)                                           \
    template NodePtr<T> make_constant<T>(Tensor<T>);                             \
    template NodePtr<T> make_parameter<T>(Tensor<T>, std::string);               \
    template NodePtr<T> detach<T>(const NodePtr<T>&);                            \
    template NodePtr<T> add<T>(const NodePtr<T>&, const NodePtr<T>&);            \
    template NodePtr<T> sub<T>(const NodePtr<T>&, const NodePtr<T>&);            \
    template NodePtr<T> mul<T>(const NodePtr<T>&, const NodePtr<T>&);            \
    template NodePtr<T> scalar_mul<T>(T, const NodePtr<T>&);                     \
    template NodePtr<T> scalar_add<T>(T, const NodePtr<T>&);                     \
    template NodePtr<T> sum<T>(const NodePtr<T>&);                               \
    template NodePtr<T> mean<T>(const NodePtr<T>&);                              \
    template NodePtr<T> mse<T>(const NodePtr<T>&, const NodePtr<T>&);            \
    template NodePtr<T> leaky_relu<T>(const NodePtr<T>&, T);                     \
    template NodePtr<T> prelu<T>(const NodePtr<T>&, const NodePtr<T>&);          \
    template NodePtr<T> tanh_op<T>(const NodePtr<T>&);                           \
    template NodePtr<T> sigmoid_op<T>(const NodePtr<T>&);                        \
    template void backward<T>(const NodePtr<T>&);                                \
    template void zero_grads<T>(const std::vector<NodePtr<T>>&);

SSRGAN_INSTANTIATE_AUTOGRAD(float)
SSRGAN_INSTANTIATE_AUTOGRAD(double)

#undef SSRGAN_INSTANTIATE_AUTOGRAD

} // namespace ssrgan
