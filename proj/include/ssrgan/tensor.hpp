#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ssrgan/errors.hpp"
#include "ssrgan/rng.hpp"

namespace ssrgan {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t extent : shape) n *= extent;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
    out << ')';
    return out.str();
}

/// Dense row-major N-d array of scalars. Plain value type: copyable,
/// movable, no view aliasing. float for training, double for gradient
/// checking.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
        validate_shape();
        data_.assign(shape_numel(shape_), fill);
    }

    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        validate_shape();
        if (data_.size() != shape_numel(shape_))
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), T(0)); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), T(1)); }
    static Tensor full(Shape shape, T value) { return Tensor(std::move(shape), value); }

    /// I.i.d. uniform draws from [lo, hi).
    static Tensor uniform(Shape shape, T lo, T hi, Rng& rng) {
        if (!(lo < hi)) throw ValueError("uniform init requires lo < hi");
        Tensor t(std::move(shape));
        for (T& x : t.data_) {
            T v = static_cast<T>(rng.next_double(lo, hi));
            // the narrowing cast can round up onto hi; keep the interval open
            if (v >= hi) v = std::nextafter(hi, lo);
            x = v;
        }
        return t;
    }

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_, T(0)); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    Tensor reshaped(Shape shape) const {
        if (shape_numel(shape) != size())
            throw ShapeError("reshape " + shape_str(shape_) + " -> " + shape_str(shape) +
                             " changes element count");
        Tensor out;
        out.shape_ = std::move(shape);
        out.data_ = data_;
        return out;
    }

private:
    void validate_shape() const {
        for (std::size_t extent : shape_)
            if (extent == 0) throw ShapeError("zero extent in shape " + shape_str(shape_));
    }

    Shape shape_;
    std::vector<T> data_;
};

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

// ---- elementwise algebra (no broadcasting; shapes must match exactly) ----

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "add");
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "sub");
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "mul");
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

template <typename T>
Tensor<T> scalar_mul(T c, const Tensor<T>& a) {
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
    return out;
}

template <typename T>
Tensor<T> scalar_add(T c, const Tensor<T>& a) {
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = c + a[i];
    return out;
}

template <typename T>
T sum(const Tensor<T>& a) {
    T acc = T(0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
    return acc;
}

template <typename T>
T mean(const Tensor<T>& a) {
    if (a.empty()) throw ShapeError("mean of empty tensor");
    return sum(a) / static_cast<T>(a.size());
}

/// Mean over all elements of (a-b)^2. Plain value; the differentiable
/// version lives in the graph ops.
template <typename T>
T mse(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "mse");
    if (a.empty()) throw ShapeError("mse of empty tensors");
    T acc = T(0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        T d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<T>(a.size());
}

template <typename T>
bool all_finite(const Tensor<T>& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

template <typename T>
T min_value(const Tensor<T>& a) {
    T m = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) m = std::min(m, a[i]);
    return m;
}

template <typename T>
T max_value(const Tensor<T>& a) {
    T m = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) m = std::max(m, a[i]);
    return m;
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::min(hi, std::max(lo, a[i]));
    return out;
}

} // namespace ssrgan
