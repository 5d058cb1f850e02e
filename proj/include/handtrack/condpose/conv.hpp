#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "handtrack/tensor.hpp"

namespace handtrack {

enum class LayerKind : std::uint8_t { Conv = 0, ConvTranspose = 1 };

/// One convolution layer. The kernel is stored (out_ch, in_ch, kh, kw)
/// row-major for both kinds.
struct ConvLayer {
    LayerKind kind = LayerKind::Conv;
    int out_ch = 0;
    int in_ch = 0;
    int kh = 0;
    int kw = 0;
    int stride = 1;
    int pad = 0;
    std::vector<float> kernel;
    std::vector<float> bias;

    static ConvLayer zeros(LayerKind kind, int out_ch, int in_ch, int kh, int kw, int stride, int pad) {
        ConvLayer l{kind, out_ch, in_ch, kh, kw, stride, pad, {}, {}};
        l.kernel.assign(static_cast<std::size_t>(out_ch) * in_ch * kh * kw, 0.0f);
        l.bias.assign(static_cast<std::size_t>(out_ch), 0.0f);
        return l;
    }

    std::size_t kernel_index(int oc, int ic, int ky, int kx) const {
        return ((static_cast<std::size_t>(oc) * in_ch + ic) * kh + ky) * kw + kx;
    }
    float& w(int oc, int ic, int ky, int kx) { return kernel[kernel_index(oc, ic, ky, kx)]; }
    float w(int oc, int ic, int ky, int kx) const { return kernel[kernel_index(oc, ic, ky, kx)]; }

    void check() const {
        if (out_ch <= 0 || in_ch <= 0 || kh <= 0 || kw <= 0 || stride <= 0 || pad < 0)
            throw std::invalid_argument("conv layer: non-positive dimension");
        if (kernel.size() != static_cast<std::size_t>(out_ch) * in_ch * kh * kw || bias.size() != static_cast<std::size_t>(out_ch))
            throw std::invalid_argument("conv layer: parameter count does not match shape");
    }
};

/// The adjoint layer: conv <-> transposed conv with in/out channels swapped
/// and the kernel transposed. Bias is zeroed.
inline ConvLayer adjoint_layer(const ConvLayer& l) {
    ConvLayer a = ConvLayer::zeros(l.kind == LayerKind::Conv ? LayerKind::ConvTranspose : LayerKind::Conv, l.in_ch,
                                   l.out_ch, l.kh, l.kw, l.stride, l.pad);
    for (int oc = 0; oc < l.out_ch; ++oc)
        for (int ic = 0; ic < l.in_ch; ++ic)
            for (int ky = 0; ky < l.kh; ++ky)
                for (int kx = 0; kx < l.kw; ++kx) a.w(ic, oc, ky, kx) = l.w(oc, ic, ky, kx);
    return a;
}

namespace conv_detail {

// Indices i in [0, count) with 0 <= i*stride - pad + k < limit, as [lo, hi).
inline std::pair<int, int> valid_range(int count, int limit, int stride, int pad, int k) {
    int lo = 0;
    while (lo < count && lo * stride - pad + k < 0) ++lo;
    int hi = count;
    while (hi > lo && (hi - 1) * stride - pad + k >= limit) --hi;
    return {lo, hi};
}

}  // namespace conv_detail

/// Cross-correlation with zero padding. Zero kernel taps are skipped, so
/// sparse (e.g. copy-configured) layers run in time proportional to their
/// nonzero taps.
template <typename T>
BasicTensor3<T> conv2d(const BasicTensor3<T>& x, const ConvLayer& l) {
    l.check();
    if (l.kind != LayerKind::Conv) throw std::invalid_argument("conv2d: layer is not a convolution");
    if (x.channels() != l.in_ch)
        throw std::invalid_argument("conv2d: input has " + std::to_string(x.channels()) + " channels, layer expects " +
                                    std::to_string(l.in_ch));
    const int H = x.height(), W = x.width();
    const int oh_n = (H + 2 * l.pad - l.kh) / l.stride + 1;
    const int ow_n = (W + 2 * l.pad - l.kw) / l.stride + 1;
    if (H + 2 * l.pad < l.kh || W + 2 * l.pad < l.kw || oh_n <= 0 || ow_n <= 0)
        throw std::invalid_argument("conv2d: kernel larger than padded input");

    std::vector<double> acc(static_cast<std::size_t>(l.out_ch) * oh_n * ow_n);
    for (int oc = 0; oc < l.out_ch; ++oc) {
        double* out = acc.data() + static_cast<std::size_t>(oc) * oh_n * ow_n;
        std::fill(out, out + static_cast<std::size_t>(oh_n) * ow_n, static_cast<double>(l.bias[oc]));
        for (int ic = 0; ic < l.in_ch; ++ic) {
            for (int ky = 0; ky < l.kh; ++ky) {
                const auto [oy0, oy1] = conv_detail::valid_range(oh_n, H, l.stride, l.pad, ky);
                for (int kx = 0; kx < l.kw; ++kx) {
                    const double wv = l.w(oc, ic, ky, kx);
                    if (wv == 0.0) continue;
                    const auto [ox0, ox1] = conv_detail::valid_range(ow_n, W, l.stride, l.pad, kx);
                    for (int oy = oy0; oy < oy1; ++oy) {
                        const int iy = oy * l.stride - l.pad + ky;
                        double* orow = out + static_cast<std::size_t>(oy) * ow_n;
                        for (int ox = ox0; ox < ox1; ++ox)
                            orow[ox] += wv * static_cast<double>(x(ic, iy, ox * l.stride - l.pad + kx));
                    }
                }
            }
        }
    }
    BasicTensor3<T> y(l.out_ch, oh_n, ow_n);
    auto yd = y.data();
    for (std::size_t i = 0; i < acc.size(); ++i) yd[i] = static_cast<T>(acc[i]);
    return y;
}

/// Transposed convolution: the adjoint of conv2d with the same geometry.
/// Output extent is (in - 1) * stride - 2 * pad + k.
template <typename T>
BasicTensor3<T> conv_transpose2d(const BasicTensor3<T>& x, const ConvLayer& l) {
    l.check();
    if (l.kind != LayerKind::ConvTranspose) throw std::invalid_argument("conv_transpose2d: layer is not transposed");
    if (x.channels() != l.in_ch)
        throw std::invalid_argument("conv_transpose2d: input has " + std::to_string(x.channels()) +
                                    " channels, layer expects " + std::to_string(l.in_ch));
    const int H = x.height(), W = x.width();
    const int oh_n = (H - 1) * l.stride - 2 * l.pad + l.kh;
    const int ow_n = (W - 1) * l.stride - 2 * l.pad + l.kw;
    if (oh_n <= 0 || ow_n <= 0) throw std::invalid_argument("conv_transpose2d: empty output");

    std::vector<double> acc(static_cast<std::size_t>(l.out_ch) * oh_n * ow_n);
    for (int oc = 0; oc < l.out_ch; ++oc) {
        double* out = acc.data() + static_cast<std::size_t>(oc) * oh_n * ow_n;
        std::fill(out, out + static_cast<std::size_t>(oh_n) * ow_n, static_cast<double>(l.bias[oc]));
        for (int ic = 0; ic < l.in_ch; ++ic) {
            for (int ky = 0; ky < l.kh; ++ky) {
                // input rows iy whose target oy = iy*stride - pad + ky is in range
                const auto [iy0, iy1] = conv_detail::valid_range(H, oh_n, l.stride, l.pad, ky);
                for (int kx = 0; kx < l.kw; ++kx) {
                    const double wv = l.w(oc, ic, ky, kx);
                    if (wv == 0.0) continue;
                    const auto [ix0, ix1] = conv_detail::valid_range(W, ow_n, l.stride, l.pad, kx);
                    for (int iy = iy0; iy < iy1; ++iy) {
                        double* orow = out + static_cast<std::size_t>(iy * l.stride - l.pad + ky) * ow_n;
                        for (int ix = ix0; ix < ix1; ++ix)
                            orow[ix * l.stride - l.pad + kx] += wv * static_cast<double>(x(ic, iy, ix));
                    }
                }
            }
        }
    }
    BasicTensor3<T> y(l.out_ch, oh_n, ow_n);
    auto yd = y.data();
    for (std::size_t i = 0; i < acc.size(); ++i) yd[i] = static_cast<T>(acc[i]);
    return y;
}

template <typename T>
BasicTensor3<T> apply_layer(const BasicTensor3<T>& x, const ConvLayer& l) {
    return l.kind == LayerKind::Conv ? conv2d(x, l) : conv_transpose2d(x, l);
}

template <typename T>
void relu_inplace(BasicTensor3<T>& x) {
    for (auto& v : x.data())
        if (v < T{}) v = T{};
}

}  // namespace handtrack
