#include "ssrgan/layers.hpp"

#include <cmath>

#include "ssrgan/errors.hpp"

namespace ssrgan {

namespace {

using ll = long long;

ll ceil_div(ll a, ll b) { return a > 0 ? (a + b - 1) / b : a / b; }

// valid output range [lo, hi] for one kernel offset:
// 0 <= o*stride + k_off - pad < extent
void output_span(ll k_off, ll stride, ll pad, ll extent, ll out_extent, ll& lo, ll& hi) {
    lo = std::max<ll>(0, ceil_div(pad - k_off, stride));
    ll num = extent - 1 - k_off + pad;
    hi = num < 0 ? -1 : std::min(out_extent - 1, num / stride);
}

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* what) {
    if (t.rank() != rank)
        throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(t.shape()));
}

std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t s, std::size_t p,
                            const char* what) {
    if (in + 2 * p < k)
        throw ShapeError(std::string(what) + ": kernel " + std::to_string(k) +
                         " exceeds padded extent " + std::to_string(in + 2 * p));
    std::size_t out = (in + 2 * p - k) / s + 1;
    if (out == 0) throw ShapeError(std::string(what) + ": collapsed output extent");
    return out;
}

} // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                         std::size_t stride, std::size_t padding) {
    require_rank(x, 4, "conv2d input");
    require_rank(w, 4, "conv2d weight");
    require_rank(b, 1, "conv2d bias");
    const ll N = ll(x.shape()[0]), Cin = ll(x.shape()[1]), H = ll(x.shape()[2]),
             W = ll(x.shape()[3]);
    const ll Cout = ll(w.shape()[0]), K = ll(w.shape()[2]);
    if (ll(w.shape()[1]) != Cin)
        throw ShapeError("conv2d: channel mismatch, input " + shape_str(x.shape()) + " weight " +
                         shape_str(w.shape()));
    if (w.shape()[2] != w.shape()[3]) throw ShapeError("conv2d: non-square kernel");
    if (ll(b.shape()[0]) != Cout) throw ShapeError("conv2d: bias/out-channel mismatch");
    const ll s = ll(stride), p = ll(padding);
    const ll OH = ll(conv_out_extent(H, K, s, p, "conv2d"));
    const ll OW = ll(conv_out_extent(W, K, s, p, "conv2d"));

    Tensor<T> out(Shape{std::size_t(N), std::size_t(Cout), std::size_t(OH), std::size_t(OW)});
    const T* xd = x.data();
    const T* wd = w.data();
    const T* bd = b.data();
    T* od = out.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (ll n = 0; n < N; ++n) {
        for (ll oc = 0; oc < Cout; ++oc) {
            T* oplane = od + (n * Cout + oc) * OH * OW;
            for (ll i = 0; i < OH * OW; ++i) oplane[i] = bd[oc];
            for (ll ic = 0; ic < Cin; ++ic) {
                const T* xplane = xd + (n * Cin + ic) * H * W;
                const T* wk = wd + (oc * Cin + ic) * K * K;
                for (ll kh = 0; kh < K; ++kh) {
                    ll oh_lo, oh_hi;
                    output_span(kh, s, p, H, OH, oh_lo, oh_hi);
                    for (ll kw = 0; kw < K; ++kw) {
                        const T wv = wk[kh * K + kw];
                        ll ow_lo, ow_hi;
                        output_span(kw, s, p, W, OW, ow_lo, ow_hi);
                        const ll off = kw - p;
                        for (ll oh = oh_lo; oh <= oh_hi; ++oh) {
                            const T* __restrict xrow = xplane + (oh * s + kh - p) * W;
                            T* __restrict orow = oplane + oh * OW;
                            if (s == 1) { // unit stride vectorizes
                                for (ll ow = ow_lo; ow <= ow_hi; ++ow)
                                    orow[ow] += wv * xrow[ow + off];
                            } else {
                                for (ll ow = ow_lo; ow <= ow_hi; ++ow)
                                    orow[ow] += wv * xrow[ow * s + off];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& w, std::size_t stride,
                            std::size_t padding, const Shape& input_shape) {
    const ll N = ll(input_shape[0]), Cin = ll(input_shape[1]), H = ll(input_shape[2]),
             W = ll(input_shape[3]);
    const ll Cout = ll(w.shape()[0]), K = ll(w.shape()[2]);
    const ll OH = ll(grad_out.shape()[2]), OW = ll(grad_out.shape()[3]);
    const ll s = ll(stride), p = ll(padding);

    Tensor<T> dx(input_shape);
    const T* gd = grad_out.data();
    const T* wd = w.data();
    T* xd = dx.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (ll n = 0; n < N; ++n) {
        for (ll ic = 0; ic < Cin; ++ic) {
            T* xplane = xd + (n * Cin + ic) * H * W;
            for (ll oc = 0; oc < Cout; ++oc) {
                const T* gplane = gd + (n * Cout + oc) * OH * OW;
                const T* wk = wd + (oc * Cin + ic) * K * K;
                for (ll kh = 0; kh < K; ++kh) {
                    ll oh_lo, oh_hi;
                    output_span(kh, s, p, H, OH, oh_lo, oh_hi);
                    for (ll kw = 0; kw < K; ++kw) {
                        const T wv = wk[kh * K + kw];
                        ll ow_lo, ow_hi;
                        output_span(kw, s, p, W, OW, ow_lo, ow_hi);
                        const ll off = kw - p;
                        for (ll oh = oh_lo; oh <= oh_hi; ++oh) {
                            T* __restrict xrow = xplane + (oh * s + kh - p) * W;
                            const T* __restrict grow = gplane + oh * OW;
                            if (s == 1) {
                                for (ll ow = ow_lo; ow <= ow_hi; ++ow)
                                    xrow[ow + off] += wv * grow[ow];
                            } else {
                                for (ll ow = ow_lo; ow <= ow_hi; ++ow)
                                    xrow[ow * s + off] += wv * grow[ow];
                            }
                        }
                    }
                }
            }
        }
    }
    return dx;
}

template <typename T>
Tensor<T> conv2d_grad_weight(const Tensor<T>& grad_out, const Tensor<T>& x, const Shape& w_shape,
                             std::size_t stride, std::size_t padding) {
    const ll N = ll(x.shape()[0]), Cin = ll(x.shape()[1]), H = ll(x.shape()[2]),
             W = ll(x.shape()[3]);
    const ll Cout = ll(w_shape[0]), K = ll(w_shape[2]);
    const ll OH = ll(grad_out.shape()[2]), OW = ll(grad_out.shape()[3]);
    const ll s = ll(stride), p = ll(padding);

    Tensor<T> dw(w_shape);
    const T* gd = grad_out.data();
    const T* xd = x.data();
    T* wd = dw.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (ll oc = 0; oc < Cout; ++oc) {
        for (ll ic = 0; ic < Cin; ++ic) {
            T* wk = wd + (oc * Cin + ic) * K * K;
            for (ll kh = 0; kh < K; ++kh) {
                ll oh_lo, oh_hi;
                output_span(kh, s, p, H, OH, oh_lo, oh_hi);
                for (ll kw = 0; kw < K; ++kw) {
                    ll ow_lo, ow_hi;
                    output_span(kw, s, p, W, OW, ow_lo, ow_hi);
                    // fixed 8-lane partial sums: deterministic order, and the
                    // independent lanes vectorize where a serial reduction cannot
                    T lanes[8] = {};
                    T acc = T(0);
                    const ll off = kw - p;
                    for (ll n = 0; n < N; ++n) {
                        const T* gplane = gd + (n * Cout + oc) * OH * OW;
                        const T* xplane = xd + (n * Cin + ic) * H * W;
                        for (ll oh = oh_lo; oh <= oh_hi; ++oh) {
                            const T* __restrict grow = gplane + oh * OW;
                            const T* __restrict xrow = xplane + (oh * s + kh - p) * W;
                            if (s == 1) {
                                ll ow = ow_lo;
                                for (; ow + 7 <= ow_hi; ow += 8)
                                    for (int lane = 0; lane < 8; ++lane)
                                        lanes[lane] += grow[ow + lane] * xrow[ow + lane + off];
                                for (; ow <= ow_hi; ++ow) acc += grow[ow] * xrow[ow + off];
                            } else {
                                for (ll ow = ow_lo; ow <= ow_hi; ++ow)
                                    acc += grow[ow] * xrow[ow * s + off];
                            }
                        }
                    }
                    for (int lane = 0; lane < 8; ++lane) acc += lanes[lane];
                    wk[kh * K + kw] = acc;
                }
            }
        }
    }
    return dw;
}

template <typename T>
Tensor<T> conv2d_grad_bias(const Tensor<T>& grad_out) {
    const ll N = ll(grad_out.shape()[0]), C = ll(grad_out.shape()[1]);
    const ll HW = ll(grad_out.shape()[2] * grad_out.shape()[3]);
    Tensor<T> db(Shape{std::size_t(C)});
    const T* gd = grad_out.data();
#pragma omp parallel for schedule(static)
    for (ll c = 0; c < C; ++c) {
        T acc = T(0);
        for (ll n = 0; n < N; ++n) {
            const T* gplane = gd + (n * C + c) * HW;
            for (ll i = 0; i < HW; ++i) acc += gplane[i];
        }
        db[std::size_t(c)] = acc;
    }
    return db;
}

template <typename T>
Tensor<T> tconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                          std::size_t stride, std::size_t padding) {
    require_rank(x, 4, "transpose_conv2d input");
    require_rank(w, 4, "transpose_conv2d weight");
    require_rank(b, 1, "transpose_conv2d bias");
    const ll N = ll(x.shape()[0]), Cin = ll(x.shape()[1]), H = ll(x.shape()[2]),
             W = ll(x.shape()[3]);
    const ll Cout = ll(w.shape()[1]), K = ll(w.shape()[2]);
    if (ll(w.shape()[0]) != Cin)
        throw ShapeError("transpose_conv2d: channel mismatch, input " + shape_str(x.shape()) +
                         " weight " + shape_str(w.shape()));
    if (ll(b.shape()[0]) != Cout) throw ShapeError("transpose_conv2d: bias/out-channel mismatch");
    const ll s = ll(stride), p = ll(padding);
    const ll OH = (H - 1) * s + K - 2 * p;
    const ll OW = (W - 1) * s + K - 2 * p;
    if (OH < 1 || OW < 1) throw ShapeError("transpose_conv2d: collapsed output extent");

    Tensor<T> out(Shape{std::size_t(N), std::size_t(Cout), std::size_t(OH), std::size_t(OW)});
    const T* xd = x.data();
    const T* wd = w.data();
    const T* bd = b.data();
    T* od = out.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (ll n = 0; n < N; ++n) {
        for (ll co = 0; co < Cout; ++co) {
            T* oplane = od + (n * Cout + co) * OH * OW;
            for (ll i = 0; i < OH * OW; ++i) oplane[i] = bd[co];
            for (ll ci = 0; ci < Cin; ++ci) {
                const T* xplane = xd + (n * Cin + ci) * H * W;
                const T* wk = wd + (ci * Cout + co) * K * K;
                for (ll kh = 0; kh < K; ++kh) {
                    ll ih_lo, ih_hi;
                    output_span(kh, s, p, OH, H, ih_lo, ih_hi);
                    for (ll kw = 0; kw < K; ++kw) {
                        const T wv = wk[kh * K + kw];
                        ll iw_lo, iw_hi;
                        output_span(kw, s, p, OW, W, iw_lo, iw_hi);
                        for (ll ih = ih_lo; ih <= ih_hi; ++ih) {
                            const T* xrow = xplane + ih * W;
                            T* orow = oplane + (ih * s + kh - p) * OW;
                            for (ll iw = iw_lo; iw <= iw_hi; ++iw)
                                orow[iw * s + kw - p] += wv * xrow[iw];
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> tconv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& w, std::size_t stride,
                             std::size_t padding, const Shape& input_shape) {
    const ll N = ll(input_shape[0]), Cin = ll(input_shape[1]), H = ll(input_shape[2]),
             W = ll(input_shape[3]);
    const ll Cout = ll(w.shape()[1]), K = ll(w.shape()[2]);
    const ll OH = ll(grad_out.shape()[2]), OW = ll(grad_out.shape()[3]);
    const ll s = ll(stride), p = ll(padding);

    Tensor<T> dx(input_shape);
    const T* gd = grad_out.data();
    const T* wd = w.data();
    T* xd = dx.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (ll n = 0; n < N; ++n) {
        for (ll ci = 0; ci < Cin; ++ci) {
            T* xplane = xd + (n * Cin + ci) * H * W;
            for (ll co = 0; co < Cout; ++co) {
                const T* gplane = gd + (n * Cout + co) * OH * OW;
                const T* wk = wd + (ci * Cout + co) * K * K;
                for (ll kh = 0; kh < K; ++kh) {
                    ll ih_lo, ih_hi;
                    output_span(kh, s, p, OH, H, ih_lo, ih_hi);
                    for (ll kw = 0; kw < K; ++kw) {
                        const T wv = wk[kh * K + kw];
                        ll iw_lo, iw_hi;
                        output_span(kw, s, p, OW, W, iw_lo, iw_hi);
                        for (ll ih = ih_lo; ih <= ih_hi; ++ih) {
                            T* xrow = xplane + ih * W;
                            const T* grow = gplane + (ih * s + kh - p) * OW;
                            for (ll iw = iw_lo; iw <= iw_hi; ++iw)
                                xrow[iw] += wv * grow[iw * s + kw - p];
                        }
                    }
                }
            }
        }
    }
    return dx;
}

template <typename T>
Tensor<T> tconv2d_grad_weight(const Tensor<T>& grad_out, const Tensor<T>& x, const Shape& w_shape,
                              std::size_t stride, std::size_t padding) {
    const ll N = ll(x.shape()[0]), Cin = ll(x.shape()[1]), H = ll(x.shape()[2]),
             W = ll(x.shape()[3]);
    const ll Cout = ll(w_shape[1]), K = ll(w_shape[2]);
    const ll OH = ll(grad_out.shape()[2]), OW = ll(grad_out.shape()[3]);
    const ll s = ll(stride), p = ll(padding);

    Tensor<T> dw(w_shape);
    const T* gd = grad_out.data();
    const T* xd = x.data();
    T* wd = dw.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (ll ci = 0; ci < Cin; ++ci) {
        for (ll co = 0; co < Cout; ++co) {
            T* wk = wd + (ci * Cout + co) * K * K;
            for (ll kh = 0; kh < K; ++kh) {
                ll ih_lo, ih_hi;
                output_span(kh, s, p, OH, H, ih_lo, ih_hi);
                for (ll kw = 0; kw < K; ++kw) {
                    ll iw_lo, iw_hi;
                    output_span(kw, s, p, OW, W, iw_lo, iw_hi);
                    T acc = T(0);
                    for (ll n = 0; n < N; ++n) {
                        const T* xplane = xd + (n * Cin + ci) * H * W;
                        const T* gplane = gd + (n * Cout + co) * OH * OW;
                        for (ll ih = ih_lo; ih <= ih_hi; ++ih) {
                            const T* xrow = xplane + ih * W;
                            const T* grow = gplane + (ih * s + kh - p) * OW;
                            for (ll iw = iw_lo; iw <= iw_hi; ++iw)
                                acc += xrow[iw] * grow[iw * s + kw - p];
                        }
                    }
                    wk[kh * K + kw] = acc;
                }
            }
        }
    }
    return dw;
}

template <typename T>
Tensor<T> pixel_shuffle_forward(const Tensor<T>& x, std::size_t r) {
    require_rank(x, 4, "pixel_shuffle input");
    const std::size_t N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    if (r < 2) throw ValueError("pixel_shuffle: upscale factor must be >= 2");
    if (C % (r * r) != 0)
        throw ShapeError("pixel_shuffle: channels " + std::to_string(C) +
                         " not divisible by r^2 = " + std::to_string(r * r));
    const std::size_t OC = C / (r * r);
    Tensor<T> out(Shape{N, OC, H * r, W * r});
    const T* xd = x.data();
    T* od = out.data();
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < OC; ++c)
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j) {
                    const T* xplane = xd + ((n * C + c * r * r + i * r + j) * H) * W;
                    for (std::size_t h = 0; h < H; ++h) {
                        T* orow = od + ((n * OC + c) * H * r + h * r + i) * W * r + j;
                        const T* xrow = xplane + h * W;
                        for (std::size_t w = 0; w < W; ++w) orow[w * r] = xrow[w];
                    }
                }
    return out;
}

template <typename T>
Tensor<T> pixel_unshuffle_forward(const Tensor<T>& x, std::size_t r) {
    require_rank(x, 4, "pixel_unshuffle input");
    const std::size_t N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    if (H % r != 0 || W % r != 0)
        throw ShapeError("pixel_unshuffle: spatial extents not divisible by r");
    const std::size_t OC = C * r * r, OH = H / r, OW = W / r;
    Tensor<T> out(Shape{N, OC, OH, OW});
    const T* xd = x.data();
    T* od = out.data();
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j) {
                    T* oplane = od + ((n * OC + c * r * r + i * r + j) * OH) * OW;
                    for (std::size_t h = 0; h < OH; ++h) {
                        const T* xrow = xd + ((n * C + c) * H + h * r + i) * W + j;
                        T* orow = oplane + h * OW;
                        for (std::size_t w = 0; w < OW; ++w) orow[w] = xrow[w * r];
                    }
                }
    return out;
}

// ---- graph ops ----

template <typename T>
NodePtr<T> conv2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b,
                  std::size_t stride, std::size_t padding) {
    Tensor<T> value = conv2d_forward(x->value, w->value, b->value, stride, padding);
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->inputs = {x, w, b};
    node->requires_grad = x->requires_grad || w->requires_grad || b->requires_grad;
    if (node->requires_grad) {
        node->backprop = [x, w, b, stride, padding](const Tensor<T>& up) {
            if (x->requires_grad)
                x->accumulate(conv2d_grad_input(up, w->value, stride, padding, x->value.shape()));
            if (w->requires_grad)
                w->accumulate(conv2d_grad_weight(up, x->value, w->value.shape(), stride, padding));
            if (b->requires_grad) b->accumulate(conv2d_grad_bias(up));
        };
    }
    return node;
}

template <typename T>
NodePtr<T> transpose_conv2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b,
                            std::size_t stride, std::size_t padding) {
    Tensor<T> value = tconv2d_forward(x->value, w->value, b->value, stride, padding);
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->inputs = {x, w, b};
    node->requires_grad = x->requires_grad || w->requires_grad || b->requires_grad;
    if (node->requires_grad) {
        node->backprop = [x, w, b, stride, padding](const Tensor<T>& up) {
            if (x->requires_grad)
                x->accumulate(tconv2d_grad_input(up, w->value, stride, padding, x->value.shape()));
            if (w->requires_grad)
                w->accumulate(tconv2d_grad_weight(up, x->value, w->value.shape(), stride, padding));
            if (b->requires_grad) b->accumulate(conv2d_grad_bias(up));
        };
    }
    return node;
}

template <typename T>
NodePtr<T> pixel_shuffle(const NodePtr<T>& x, std::size_t r) {
    Tensor<T> value = pixel_shuffle_forward(x->value, r);
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->inputs = {x};
    node->requires_grad = x->requires_grad;
    if (node->requires_grad) {
        // gradient of a permutation is its inverse permutation
        node->backprop = [x, r](const Tensor<T>& up) {
            x->accumulate(pixel_unshuffle_forward(up, r));
        };
    }
    return node;
}

template <typename T>
NodePtr<T> batch_norm2d(const NodePtr<T>& x, const NodePtr<T>& gamma, const NodePtr<T>& beta,
                        Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode, T momentum,
                        T eps) {
    require_rank(x->value, 4, "batch_norm input");
    const std::size_t N = x->value.shape()[0], C = x->value.shape()[1],
                      H = x->value.shape()[2], W = x->value.shape()[3];
    if (gamma->value.shape() != Shape{C} || beta->value.shape() != Shape{C})
        throw ShapeError("batch_norm: gamma/beta must have shape (" + std::to_string(C) + ")");
    const std::size_t M = N * H * W;
    const std::size_t HW = H * W;

    std::vector<T> inv_std(C);
    Tensor<T> xhat(x->value.shape());
    const T* xd = x->value.data();

    if (mode == Mode::train) {
        if (M < 2) throw ValueError("batch_norm: degenerate batch, N*H*W = 1 in train mode");
        for (std::size_t c = 0; c < C; ++c) {
            double sum = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const T* plane = xd + (n * C + c) * HW;
                for (std::size_t i = 0; i < HW; ++i) sum += double(plane[i]);
            }
            const double mu = sum / double(M);
            double var_acc = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const T* plane = xd + (n * C + c) * HW;
                for (std::size_t i = 0; i < HW; ++i) {
                    double d = double(plane[i]) - mu;
                    var_acc += d * d;
                }
            }
            const double var = var_acc / double(M); // biased, matches the normalization
            const T istd = T(1.0 / std::sqrt(var + double(eps)));
            inv_std[c] = istd;
            for (std::size_t n = 0; n < N; ++n) {
                const T* plane = xd + (n * C + c) * HW;
                T* hplane = xhat.data() + (n * C + c) * HW;
                for (std::size_t i = 0; i < HW; ++i) hplane[i] = (plane[i] - T(mu)) * istd;
            }
            running_mean[c] = momentum * running_mean[c] + (T(1) - momentum) * T(mu);
            running_var[c] = momentum * running_var[c] + (T(1) - momentum) * T(var);
        }
    } else {
        for (std::size_t c = 0; c < C; ++c) {
            const T istd = T(1.0 / std::sqrt(double(running_var[c]) + double(eps)));
            inv_std[c] = istd;
            const T mu = running_mean[c];
            for (std::size_t n = 0; n < N; ++n) {
                const T* plane = xd + (n * C + c) * HW;
                T* hplane = xhat.data() + (n * C + c) * HW;
                for (std::size_t i = 0; i < HW; ++i) hplane[i] = (plane[i] - mu) * istd;
            }
        }
    }

    Tensor<T> value(x->value.shape());
    for (std::size_t c = 0; c < C; ++c) {
        const T g = gamma->value[c], sh = beta->value[c];
        for (std::size_t n = 0; n < N; ++n) {
            const T* hplane = xhat.data() + (n * C + c) * HW;
            T* vplane = value.data() + (n * C + c) * HW;
            for (std::size_t i = 0; i < HW; ++i) vplane[i] = g * hplane[i] + sh;
        }
    }

    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->inputs = {x, gamma, beta};
    node->requires_grad = x->requires_grad || gamma->requires_grad || beta->requires_grad;
    if (node->requires_grad) {
        const bool through_stats = (mode == Mode::train);
        node->backprop = [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std),
                          through_stats, N, C, HW, M](const Tensor<T>& up) {
            for (std::size_t c = 0; c < C; ++c) {
                double sum_up = 0.0, sum_up_xhat = 0.0;
                for (std::size_t n = 0; n < N; ++n) {
                    const T* uplane = up.data() + (n * C + c) * HW;
                    const T* hplane = xhat.data() + (n * C + c) * HW;
                    for (std::size_t i = 0; i < HW; ++i) {
                        sum_up += double(uplane[i]);
                        sum_up_xhat += double(uplane[i]) * double(hplane[i]);
                    }
                }
                if (gamma->requires_grad) {
                    gamma->ensure_grad();
                    gamma->grad[c] += T(sum_up_xhat);
                }
                if (beta->requires_grad) {
                    beta->ensure_grad();
                    beta->grad[c] += T(sum_up);
                }
                if (x->requires_grad) {
                    x->ensure_grad();
                    const T g_istd = gamma->value[c] * inv_std[c];
                    const T mean_up = T(sum_up / double(M));
                    const T mean_up_xhat = T(sum_up_xhat / double(M));
                    for (std::size_t n = 0; n < N; ++n) {
                        const T* uplane = up.data() + (n * C + c) * HW;
                        const T* hplane = xhat.data() + (n * C + c) * HW;
                        T* gx = x->grad.data() + (n * C + c) * HW;
                        if (through_stats) {
                            for (std::size_t i = 0; i < HW; ++i)
                                gx[i] += g_istd *
                                         (uplane[i] - mean_up - hplane[i] * mean_up_xhat);
                        } else {
                            for (std::size_t i = 0; i < HW; ++i) gx[i] += g_istd * uplane[i];
                        }
                    }
                }
            }
        };
    }
    return node;
}

// ---- layer objects ----

namespace {

template <typename T>
NodePtr<T> init_conv_weight(Shape shape, double fan_in, Rng& rng, const std::string& name) {
    const T bound = T(1.0 / std::sqrt(fan_in));
    return make_parameter(Tensor<T>::uniform(std::move(shape), -bound, bound, rng), name);
}

} // namespace

template <typename T>
Conv2d<T>::Conv2d(std::size_t in_channels_, std::size_t out_channels_, std::size_t kernel_,
                  std::size_t stride_, std::size_t padding_, Rng& rng, const std::string& name)
    : in_channels(in_channels_), out_channels(out_channels_), kernel(kernel_), stride(stride_),
      padding(padding_) {
    const double fan_in = double(in_channels) * double(kernel) * double(kernel);
    weight = init_conv_weight<T>(Shape{out_channels, in_channels, kernel, kernel}, fan_in, rng,
                                 name + ".weight");
    const T bound = T(1.0 / std::sqrt(fan_in));
    bias = make_parameter(Tensor<T>::uniform(Shape{out_channels}, -bound, bound, rng),
                          name + ".bias");
}

template <typename T>
NodePtr<T> Conv2d<T>::forward(const NodePtr<T>& x) const {
    return conv2d(x, weight, bias, stride, padding);
}

template <typename T>
void Conv2d<T>::collect_parameters(std::vector<NodePtr<T>>& out) const {
    out.push_back(weight);
    out.push_back(bias);
}

template <typename T>
TransposeConv2d<T>::TransposeConv2d(std::size_t in_channels_, std::size_t out_channels_,
                                    std::size_t kernel_, std::size_t stride_,
                                    std::size_t padding_, Rng& rng, const std::string& name)
    : in_channels(in_channels_), out_channels(out_channels_), kernel(kernel_), stride(stride_),
      padding(padding_) {
    // fan-in = summed terms per output element: in * ceil(k/s)^2
    const double taps = double((kernel + stride - 1) / stride);
    const double fan_in = double(in_channels) * taps * taps;
    weight = init_conv_weight<T>(Shape{in_channels, out_channels, kernel, kernel}, fan_in, rng,
                                 name + ".weight");
    const T bound = T(1.0 / std::sqrt(fan_in));
    bias = make_parameter(Tensor<T>::uniform(Shape{out_channels}, -bound, bound, rng),
                          name + ".bias");
}

template <typename T>
NodePtr<T> TransposeConv2d<T>::forward(const NodePtr<T>& x) const {
    return transpose_conv2d(x, weight, bias, stride, padding);
}

template <typename T>
void TransposeConv2d<T>::collect_parameters(std::vector<NodePtr<T>>& out) const {
    out.push_back(weight);
    out.push_back(bias);
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::size_t channels_, const std::string& name_)
    : channels(channels_), name(name_) {
    gamma = make_parameter(Tensor<T>::ones(Shape{channels}), name + ".gamma");
    beta = make_parameter(Tensor<T>::zeros(Shape{channels}), name + ".beta");
    running_mean = Tensor<T>::zeros(Shape{channels});
    running_var = Tensor<T>::ones(Shape{channels});
}

template <typename T>
NodePtr<T> BatchNorm2d<T>::forward(const NodePtr<T>& x, Mode mode) {
    return batch_norm2d(x, gamma, beta, running_mean, running_var, mode, momentum, eps);
}

template <typename T>
void BatchNorm2d<T>::collect_parameters(std::vector<NodePtr<T>>& out) const {
    out.push_back(gamma);
    out.push_back(beta);
}

template <typename T>
void BatchNorm2d<T>::collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out) {
    out.emplace_back(name + ".running_mean", &running_mean);
    out.emplace_back(name + ".running_var", &running_var);
}

template <typename T>
PReLU<T>::PReLU(const std::string& name) {
    slope = make_parameter(Tensor<T>::full(Shape{1}, T(0.25)), name + ".slope");
}

template <typename T>
NodePtr<T> PReLU<T>::forward(const NodePtr<T>& x) const {
    return prelu(x, slope);
}

template <typename T>
void PReLU<T>::collect_parameters(std::vector<NodePtr<T>>& out) const {
    out.push_back(slope);
}

template <typename T>
ResidualBlock<T>::ResidualBlock(std::size_t channels, bool use_bn_, Rng& rng,
                                const std::string& name)
    : use_bn(use_bn_),
      conv1(channels, channels, 3, 1, 1, rng, name + ".conv1"),
      act(name + ".act"),
      conv2(channels, channels, 3, 1, 1, rng, name + ".conv2") {
    if (use_bn) {
        bn1 = std::make_unique<BatchNorm2d<T>>(channels, name + ".bn1");
        bn2 = std::make_unique<BatchNorm2d<T>>(channels, name + ".bn2");
    }
}

template <typename T>
NodePtr<T> ResidualBlock<T>::forward(const NodePtr<T>& x, Mode mode) {
    NodePtr<T> h = conv1.forward(x);
    if (use_bn) h = bn1->forward(h, mode);
    h = act.forward(h);
    h = conv2.forward(h);
    if (use_bn) h = bn2->forward(h, mode);
    return add(x, h);
}

template <typename T>
void ResidualBlock<T>::collect_parameters(std::vector<NodePtr<T>>& out) const {
    conv1.collect_parameters(out);
    if (use_bn) bn1->collect_parameters(out);
    act.collect_parameters(out);
    conv2.collect_parameters(out);
    if (use_bn) bn2->collect_parameters(out);
}

template <typename T>
void ResidualBlock<T>::collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out) {
    if (use_bn) {
        bn1->collect_buffers(out);
        bn2->collect_buffers(out);
    }
}

#define SSRGAN_INSTANTIATE_LAYERS(T)                                                          \
    template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                         std::size_t, std::size_t);                           \
    template Tensor<T> conv2d_grad_input<T>(const Tensor<T>&, const Tensor<T>&, std::size_t,  \
                                            std::size_t, const Shape&);                       \
    template Tensor<T> conv2d_grad_weight<T>(const Tensor<T>&, const Tensor<T>&, const Shape&, \
                                             std::size_t, std::size_t);                       \
    template Tensor<T> conv2d_grad_bias<T>(const Tensor<T>&);                                 \
    template Tensor<T> tconv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                          std::size_t, std::size_t);                          \
    template Tensor<T> tconv2d_grad_input<T>(const Tensor<T>&, const Tensor<T>&, std::size_t, \
                                             std::size_t, const Shape&);                      \
    template Tensor<T> tconv2d_grad_weight<T>(const Tensor<T>&, const Tensor<T>&, const Shape&, \
                                              std::size_t, std::size_t);                      \
    template Tensor<T> pixel_shuffle_forward<T>(const Tensor<T>&, std::size_t);               \
    template Tensor<T> pixel_unshuffle_forward<T>(const Tensor<T>&, std::size_t);             \
    template NodePtr<T> conv2d<T>(const NodePtr<T>&, const NodePtr<T>&, const NodePtr<T>&,    \
                                  std::size_t, std::size_t);                                  \
    template NodePtr<T> transpose_conv2d<T>(const NodePtr<T>&, const NodePtr<T>&,             \
                                            const NodePtr<T>&, std::size_t, std::size_t);     \
    template NodePtr<T> pixel_shuffle<T>(const NodePtr<T>&, std::size_t);                     \
    template NodePtr<T> batch_norm2d<T>(const NodePtr<T>&, const NodePtr<T>&,                 \
                                        const NodePtr<T>&, Tensor<T>&, Tensor<T>&, Mode, T, T); \
    template class Conv2d<T>;                                                                 \
    template class TransposeConv2d<T>;                                                        \
    template class BatchNorm2d<T>;                                                            \
    template class PReLU<T>;                                                                  \
    template class ResidualBlock<T>;

SSRGAN_INSTANTIATE_LAYERS(float)
SSRGAN_INSTANTIATE_LAYERS(double)

#undef SSRGAN_INSTANTIATE_LAYERS

} // namespace ssrgan
