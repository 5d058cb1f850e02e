#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "handtrack/data/types.hpp"
#include "handtrack/tensor.hpp"

namespace handtrack {

using Embedding = Eigen::VectorXd;

inline constexpr int kGcnHidden = 64;
inline constexpr int kEmbedDim = 128;
inline constexpr int kVisualDim = 64;

/// Skeleton edges: wrist to each mcp, then along every finger.
inline Eigen::MatrixXd skeleton_adjacency() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(kNumJoints, kNumJoints);
    auto link = [&](int i, int j) { a(i, j) = a(j, i) = 1.0; };
    for (int f = 0; f < 5; ++f) {
        const int mcp = 1 + 4 * f;
        link(0, mcp);
        for (int s = 0; s < 3; ++s) link(mcp + s, mcp + s + 1);
    }
    return a;
}

/// D^-1/2 (A + I) D^-1/2.
inline Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd ai = a + Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::VectorXd d = ai.rowwise().sum().cwiseSqrt().cwiseInverse();
    return d.asDiagonal() * ai * d.asDiagonal();
}

/// J x C keypoint matrix relative to the bbox: (x - bx) / w, (y - by) / h.
/// Unannotated rows are -1 in the coordinate channels; with C = 3 the
/// third channel flags annotation (1) or its absence (0).
inline Eigen::MatrixXd pose_feature(const HandInstance& hand, int channels = 2) {
    if (channels != 2 && channels != 3) throw std::invalid_argument("pose_feature: channels must be 2 or 3");
    Eigen::MatrixXd x(kNumJoints, channels);
    for (int j = 0; j < kNumJoints; ++j) {
        const auto& kp = hand.keypoints[j];
        if (kp.annotated()) {
            x(j, 0) = (kp.x - hand.bbox.x) / hand.bbox.w;
            x(j, 1) = (kp.y - hand.bbox.y) / hand.bbox.h;
        } else {
            x(j, 0) = x(j, 1) = -1.0;
        }
        if (channels == 3) x(j, 2) = kp.annotated() ? 1.0 : 0.0;
    }
    return x;
}

/// Two graph-conv layers with mean pooling (pose embedding) followed by
/// the joint visual-pose layer: FC -> ReLU -> FC over [pooled v; pose].
struct GcnWeights {
    int channels = 2;
    Eigen::MatrixXd adjacency;  // normalized
    Eigen::MatrixXd w1;         // C x hidden
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // hidden x embed
    Eigen::VectorXd b2;
    Eigen::MatrixXd f1;  // embed x (visual + embed)
    Eigen::VectorXd c1;
    Eigen::MatrixXd f2;  // embed x embed
    Eigen::VectorXd c2;

    static GcnWeights zeros(int channels = 2) {
        GcnWeights w;
        w.channels = channels;
        w.adjacency = normalized_adjacency(skeleton_adjacency());
        w.w1 = Eigen::MatrixXd::Zero(channels, kGcnHidden);
        w.b1 = Eigen::VectorXd::Zero(kGcnHidden);
        w.w2 = Eigen::MatrixXd::Zero(kGcnHidden, kEmbedDim);
        w.b2 = Eigen::VectorXd::Zero(kEmbedDim);
        w.f1 = Eigen::MatrixXd::Zero(kEmbedDim, kVisualDim + kEmbedDim);
        w.c1 = Eigen::VectorXd::Zero(kEmbedDim);
        w.f2 = Eigen::MatrixXd::Zero(kEmbedDim, kEmbedDim);
        w.c2 = Eigen::VectorXd::Zero(kEmbedDim);
        return w;
    }

    static GcnWeights random(std::uint64_t seed, int channels = 2) {
        GcnWeights w = zeros(channels);
        std::mt19937_64 rng(seed);
        auto fill = [&](auto& m, double fan_in) {
            std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
        };
        fill(w.w1, channels);
        fill(w.b1, channels);
        fill(w.w2, kGcnHidden);
        fill(w.b2, kGcnHidden);
        fill(w.f1, kVisualDim + kEmbedDim);
        fill(w.c1, kVisualDim + kEmbedDim);
        fill(w.f2, kEmbedDim);
        fill(w.c2, kEmbedDim);
        return w;
    }

    void check() const {
        if (adjacency.rows() != kNumJoints || adjacency.cols() != kNumJoints || w1.rows() != channels ||
            w1.cols() != b1.size() || w2.rows() != w1.cols() || w2.cols() != b2.size() ||
            f1.cols() != kVisualDim + b2.size() || f1.rows() != c1.size() || f2.cols() != f1.rows() ||
            f2.rows() != c2.size())
            throw std::invalid_argument("GCN weights: inconsistent shapes");
    }
};

/// Intermediate activations kept for backpropagation.
struct GcnTrace {
    Eigen::MatrixXd ax;  // A X
    Eigen::MatrixXd z1, h1;
    Eigen::MatrixXd ah1;  // A H1
    Eigen::MatrixXd z2, h2;
    Embedding out;
};

inline GcnTrace gcn_forward(const Eigen::MatrixXd& x, const GcnWeights& w) {
    if (x.rows() != kNumJoints || x.cols() != w.channels)
        throw std::invalid_argument("gcn_embed: feature shape does not match weights");
    GcnTrace t;
    t.ax = w.adjacency * x;
    t.z1 = (t.ax * w.w1).rowwise() + w.b1.transpose();
    t.h1 = t.z1.cwiseMax(0.0);
    t.ah1 = w.adjacency * t.h1;
    t.z2 = (t.ah1 * w.w2).rowwise() + w.b2.transpose();
    t.h2 = t.z2.cwiseMax(0.0);
    t.out = t.h2.colwise().mean().transpose();
    return t;
}

inline Embedding gcn_embed(const Eigen::MatrixXd& x, const GcnWeights& w) { return gcn_forward(x, w).out; }

/// Global spatial mean per channel.
inline Eigen::VectorXd pool_features(const Tensor3& v) {
    Eigen::VectorXd p(v.channels());
    for (int c = 0; c < v.channels(); ++c) {
        double s = 0.0;
        for (float x : v.plane(c)) s += x;
        p(c) = s / static_cast<double>(v.plane_size());
    }
    return p;
}

struct JointTrace {
    Eigen::VectorXd z;  // [pooled; pose]
    Eigen::VectorXd u, a;
    Embedding out;
};

inline JointTrace joint_forward(const Eigen::VectorXd& pooled, const Embedding& pose, const GcnWeights& w) {
    if (pooled.size() != kVisualDim || pose.size() != w.b2.size())
        throw std::invalid_argument("joint_visual_embed: input dimension mismatch");
    JointTrace t;
    t.z.resize(pooled.size() + pose.size());
    t.z << pooled, pose;
    t.u = w.f1 * t.z + w.c1;
    t.a = t.u.cwiseMax(0.0);
    t.out = w.f2 * t.a + w.c2;
    return t;
}

inline Embedding joint_visual_embed(const Tensor3& v, const Embedding& pose, const GcnWeights& w) {
    if (v.channels() != kVisualDim) throw std::invalid_argument("joint_visual_embed: features must have 64 channels");
    return joint_forward(pool_features(v), pose, w).out;
}

/// Parameter gradients, same layout as GcnWeights (adjacency unused).
struct GcnGrad {
    Eigen::MatrixXd w1, w2, f1, f2;
    Eigen::VectorXd b1, b2, c1, c2;

    static GcnGrad zeros_like(const GcnWeights& w) {
        return {Eigen::MatrixXd::Zero(w.w1.rows(), w.w1.cols()), Eigen::MatrixXd::Zero(w.w2.rows(), w.w2.cols()),
                Eigen::MatrixXd::Zero(w.f1.rows(), w.f1.cols()), Eigen::MatrixXd::Zero(w.f2.rows(), w.f2.cols()),
                Eigen::VectorXd::Zero(w.b1.size()),               Eigen::VectorXd::Zero(w.b2.size()),
                Eigen::VectorXd::Zero(w.c1.size()),               Eigen::VectorXd::Zero(w.c2.size())};
    }
};

/// Accumulates d(loss)/d(params) of the GCN given d(loss)/d(embedding).
inline void gcn_backward(const GcnTrace& t, const GcnWeights& w, const Embedding& g, GcnGrad& grad) {
    const double n = static_cast<double>(t.h2.rows());
    Eigen::MatrixXd dz2 = (Eigen::VectorXd::Ones(t.h2.rows()) * (g.transpose() / n)).cwiseProduct(
        (t.z2.array() > 0.0).cast<double>().matrix());
    grad.w2 += t.ah1.transpose() * dz2;
    grad.b2 += dz2.colwise().sum().transpose();
    Eigen::MatrixXd dh1 = w.adjacency.transpose() * dz2 * w.w2.transpose();
    Eigen::MatrixXd dz1 = dh1.cwiseProduct((t.z1.array() > 0.0).cast<double>().matrix());
    grad.w1 += t.ax.transpose() * dz1;
    grad.b1 += dz1.colwise().sum().transpose();
}

/// Accumulates joint-layer gradients and returns d(loss)/d(pose embedding).
inline Embedding joint_backward(const JointTrace& t, const GcnWeights& w, const Embedding& g, GcnGrad& grad) {
    grad.f2 += g * t.a.transpose();
    grad.c2 += g;
    Eigen::VectorXd du = (w.f2.transpose() * g).cwiseProduct((t.u.array() > 0.0).cast<double>().matrix());
    grad.f1 += du * t.z.transpose();
    grad.c1 += du;
    const Eigen::VectorXd dz = w.f1.transpose() * du;
    return dz.tail(dz.size() - kVisualDim);
}

}  // namespace handtrack
