#include "ssrgan/metrics.hpp"

#include "ssrgan/errors.hpp"

namespace ssrgan {

template <typename T>
double nmse(const Tensor<T>& h, const Tensor<T>& h_hat) {
    check_same_shape(h, h_hat, "nmse");
    if (h.empty()) throw ShapeError("nmse of empty tensors");
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double d = double(h[i]) - double(h_hat[i]);
        err += d * d;
        ref += double(h[i]) * double(h[i]);
    }
    if (ref == 0.0) throw ValueError("nmse: reference has zero norm");
    return err / ref;
}

template <typename T>
NmseResult nmse_dataset(const std::vector<std::pair<Tensor<T>, Tensor<T>>>& pairs) {
    if (pairs.empty()) throw ValueError("nmse_dataset: empty input");
    NmseResult result;
    result.per_image.reserve(pairs.size());
    double acc = 0.0;
    for (const auto& [h, h_hat] : pairs) {
        const double v = nmse(h, h_hat);
        result.per_image.push_back(v);
        acc += v;
    }
    result.count = pairs.size();
    result.mean = acc / double(result.count);
    return result;
}

template double nmse<float>(const Tensor<float>&, const Tensor<float>&);
template double nmse<double>(const Tensor<double>&, const Tensor<double>&);
template NmseResult nmse_dataset<float>(
    const std::vector<std::pair<Tensor<float>, Tensor<float>>>&);
template NmseResult nmse_dataset<double>(
    const std::vector<std::pair<Tensor<double>, Tensor<double>>>&);

} // namespace ssrgan
