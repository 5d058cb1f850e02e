#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "handtrack/condpose/conv.hpp"
#include "handtrack/heatmap/cphm.hpp"
#include "handtrack/heatmap/heatmap.hpp"

namespace handtrack {

inline constexpr int kBranchWidth = 256;

enum class BranchKind { Attention, Fusion };

inline std::string branch_name(BranchKind k) { return k == BranchKind::Attention ? "att" : "fus"; }

struct LayerShape {
    LayerKind kind;
    int out_ch, in_ch, kh, kw, stride, pad;
};

/// Both branches: conv 3x3/s1/p1 -> ReLU -> conv 2x2/s2 -> ReLU ->
/// transposed conv 4x4/s2/p1, so the output raster equals the input raster.
/// The attention branch reads [features; prior], the fusion branch
/// [initial heatmap; weighted prior].
inline std::array<LayerShape, 3> branch_layout(BranchKind kind, int joints) {
    const int in = kind == BranchKind::Attention ? kFeatureChannels + joints : 2 * joints;
    return {{{LayerKind::Conv, kBranchWidth, in, 3, 3, 1, 1},
             {LayerKind::Conv, kBranchWidth, kBranchWidth, 2, 2, 2, 0},
             {LayerKind::ConvTranspose, joints, kBranchWidth, 4, 4, 2, 1}}};
}

struct BranchWeights {
    BranchKind kind = BranchKind::Fusion;
    std::vector<ConvLayer> layers;
};

inline void validate_branch(const BranchWeights& b, int joints) {
    const auto layout = branch_layout(b.kind, joints);
    if (b.layers.size() != layout.size())
        throw std::invalid_argument("branch '" + branch_name(b.kind) + "': expected 3 layers, got " +
                                    std::to_string(b.layers.size()));
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& l = b.layers[i];
        const auto& s = layout[i];
        if (l.kind != s.kind || l.out_ch != s.out_ch || l.in_ch != s.in_ch || l.kh != s.kh || l.kw != s.kw ||
            l.stride != s.stride || l.pad != s.pad)
            throw std::invalid_argument("branch '" + branch_name(b.kind) + "': layer " + std::to_string(i) +
                                        " does not match the branch layout");
        l.check();
    }
}

struct CondWeights {
    int joints = kNumJoints;
    BranchWeights attention{BranchKind::Attention, {}};
    BranchWeights fusion{BranchKind::Fusion, {}};

    void validate() const {
        validate_branch(attention, joints);
        validate_branch(fusion, joints);
    }
};

inline BranchWeights zero_branch(BranchKind kind, int joints) {
    BranchWeights b{kind, {}};
    for (const auto& s : branch_layout(kind, joints))
        b.layers.push_back(ConvLayer::zeros(s.kind, s.out_ch, s.in_ch, s.kh, s.kw, s.stride, s.pad));
    return b;
}

/// Weights under which the branch output reproduces input channels
/// [offset, offset + joints) exactly. Layer 1 routes +x and -x through the
/// ReLU, layer 2 splits every 2x2 block into one channel per phase, and
/// the transposed layer writes each phase back to its source pixel.
/// Needs 8 * joints <= 256.
inline BranchWeights copy_branch(BranchKind kind, int joints, int offset) {
    if (8 * joints > kBranchWidth) throw std::invalid_argument("copy_branch: too many joints for the branch width");
    BranchWeights b = zero_branch(kind, joints);
    auto& l1 = b.layers[0];
    auto& l2 = b.layers[1];
    auto& l3 = b.layers[2];
    if (offset < 0 || offset + joints > l1.in_ch) throw std::invalid_argument("copy_branch: offset out of range");
    for (int j = 0; j < joints; ++j) {
        l1.w(2 * j, offset + j, 1, 1) = 1.0f;
        l1.w(2 * j + 1, offset + j, 1, 1) = -1.0f;
        for (int sign = 0; sign < 2; ++sign) {
            for (int ry = 0; ry < 2; ++ry) {
                for (int rx = 0; rx < 2; ++rx) {
                    const int ch = 8 * j + 4 * sign + 2 * ry + rx;
                    l2.w(ch, 2 * j + sign, ry, rx) = 1.0f;
                    l3.w(j, ch, ry + 1, rx + 1) = sign == 0 ? 1.0f : -1.0f;
                }
            }
        }
    }
    return b;
}

/// Uniform(-a, a) weights with a = scale / sqrt(fan_in), deterministic per seed.
inline BranchWeights random_branch(BranchKind kind, int joints, std::uint64_t seed, double scale = 1.0) {
    BranchWeights b = zero_branch(kind, joints);
    std::mt19937_64 rng(seed);
    for (auto& l : b.layers) {
        const double fan_in = l.in_ch * l.kh * l.kw;
        std::uniform_real_distribution<double> u(-scale / std::sqrt(fan_in), scale / std::sqrt(fan_in));
        for (auto& w : l.kernel) w = static_cast<float>(u(rng));
        for (auto& w : l.bias) w = static_cast<float>(u(rng));
    }
    return b;
}

inline CondWeights zero_weights(int joints = kNumJoints) {
    return {joints, zero_branch(BranchKind::Attention, joints), zero_branch(BranchKind::Fusion, joints)};
}

/// Attention passes the prior through; fusion passes the initial heatmap
/// through, so the conditional output equals the base prediction.
inline CondWeights copy_weights(int joints = kNumJoints) {
    return {joints, copy_branch(BranchKind::Attention, joints, kFeatureChannels),
            copy_branch(BranchKind::Fusion, joints, 0)};
}

inline CondWeights random_weights(std::uint64_t seed, int joints = kNumJoints, double scale = 1.0) {
    return {joints, random_branch(BranchKind::Attention, joints, seed, scale),
            random_branch(BranchKind::Fusion, joints, seed + 1, scale)};
}

template <typename T>
BasicTensor3<T> run_branch(const BasicTensor3<T>& input, const BranchWeights& b) {
    auto x = apply_layer(input, b.layers.at(0));
    relu_inplace(x);
    x = apply_layer(x, b.layers.at(1));
    relu_inplace(x);
    return apply_layer(x, b.layers.at(2));
}

/// Weighted prior: the attention branch over [features; aligned prior].
inline Heatmap attention_forward(const Tensor3& features, const Heatmap& prior_aligned, const BranchWeights& w) {
    if (features.channels() != kFeatureChannels)
        throw std::invalid_argument("attention_forward: features must have 64 channels");
    if (features.height() != prior_aligned.grid.height() || features.width() != prior_aligned.grid.width())
        throw std::invalid_argument("attention_forward: spatial mismatch " + features.shape() + " vs " +
                                    prior_aligned.grid.shape());
    auto out = run_branch(concat_channels(features, prior_aligned.grid), w);
    return {std::move(out), prior_aligned.window};
}

/// Final conditional heatmap: the fusion branch over [initial; weighted prior].
inline Heatmap fuse_forward(const Heatmap& initial, const Heatmap& weighted_prior, const BranchWeights& w,
                            bool clamp_outputs = false) {
    if (!(initial.window == weighted_prior.window))
        throw std::invalid_argument("fuse_forward: heatmaps belong to different crop windows");
    if (!initial.grid.same_shape(weighted_prior.grid))
        throw std::invalid_argument("fuse_forward: shape mismatch " + initial.grid.shape() + " vs " +
                                    weighted_prior.grid.shape());
    auto out = run_branch(concat_channels(initial.grid, weighted_prior.grid), w);
    if (clamp_outputs)
        for (auto& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
    return {std::move(out), initial.window};
}

}  // namespace handtrack
