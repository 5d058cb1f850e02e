#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "handtrack/data/types.hpp"
#include "handtrack/tracking/contrastive.hpp"
#include "handtrack/tracking/gcn.hpp"
#include "handtrack/tracking/pair_sampler.hpp"

namespace handtrack {

struct GcnFitConfig {
    int epochs = 60;
    int pairs_per_epoch = 1024;
    int batch_size = 32;
    double learning_rate = 1e-2;
    std::vector<int> decay_epochs = {20, 30};  // lr /= 10 at each
    double margin = 1.0;
    bool visual = false;  // train the joint visual-pose layer too
    int eval_pairs = 2000;
    std::uint64_t seed = 0;
};

struct GcnFitResult {
    GcnWeights weights;
    std::vector<double> epoch_loss;
    double accuracy = 0.0;  // held-out pair classification
};

/// Pooled 64-d visual vector for a hand; used only when fitting the joint layer.
using VisualLookup = std::function<Eigen::VectorXd(const HandRef&)>;

/// Embedding used for matching: pose only, or joint visual-pose.
inline Embedding embed_hand(const HandInstance& hand, const GcnWeights& w, const Eigen::VectorXd* pooled_visual) {
    Embedding p = gcn_embed(pose_feature(hand, w.channels), w);
    if (!pooled_visual) return p;
    return joint_forward(*pooled_visual, p, w).out;
}

/// A pair counts as "same hand" when its embedding distance is below half
/// the margin.
inline double pair_accuracy(const Dataset& ds, const GcnWeights& w, double margin, int n, std::uint64_t seed,
                            const VisualLookup& visual = {}) {
    PairSampler sampler(ds, seed);
    int correct = 0;
    for (int i = 0; i < n; ++i) {
        const auto s = sampler.next();
        Eigen::VectorXd va, vb;
        if (visual) {
            va = visual(s.a);
            vb = visual(s.b);
        }
        const Embedding ea = embed_hand(*s.a.hand, w, visual ? &va : nullptr);
        const Embedding eb = embed_hand(*s.b.hand, w, visual ? &vb : nullptr);
        const bool same = (ea - eb).norm() < 0.5 * margin;
        correct += (same == (s.label == 1));
    }
    return static_cast<double>(correct) / n;
}

namespace fit_detail {

class Adam {
public:
    explicit Adam(const GcnGrad& shape) : m_(shape), v_(shape) {}

    void step(GcnWeights& w, const GcnGrad& g, double lr) {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, t_), c2 = 1.0 - std::pow(b2_, t_);
        auto upd = [&](auto& p, const auto& grad, auto& m, auto& v) {
            m = b1_ * m + (1.0 - b1_) * grad;
            v = b2_ * v + (1.0 - b2_) * grad.cwiseProduct(grad);
            p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
        };
        upd(w.w1, g.w1, m_.w1, v_.w1);
        upd(w.b1, g.b1, m_.b1, v_.b1);
        upd(w.w2, g.w2, m_.w2, v_.w2);
        upd(w.b2, g.b2, m_.b2, v_.b2);
        upd(w.f1, g.f1, m_.f1, v_.f1);
        upd(w.c1, g.c1, m_.c1, v_.c1);
        upd(w.f2, g.f2, m_.f2, v_.f2);
        upd(w.c2, g.c2, m_.c2, v_.c2);
    }

private:
    GcnGrad m_, v_;
    int t_ = 0;
    double b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
};

}  // namespace fit_detail

/// Mini-batch Adam on the contrastive loss over sampled pairs, with step
/// decay of the learning rate. Joint-layer parameters stay fixed unless
/// cfg.visual is set.
inline GcnFitResult fit_gcn(const Dataset& ds, GcnWeights init, const GcnFitConfig& cfg, const VisualLookup& visual = {}) {
    if (cfg.visual && !visual) throw std::invalid_argument("fit_gcn: visual mode needs a feature lookup");
    GcnFitResult res;
    res.weights = std::move(init);
    GcnWeights& w = res.weights;
    w.check();
    PairSampler sampler(ds, cfg.seed);
    fit_detail::Adam adam(GcnGrad::zeros_like(w));
    double lr = cfg.learning_rate;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int d : cfg.decay_epochs)
            if (epoch == d) lr *= 0.1;
        double total = 0.0;
        for (int start = 0; start < cfg.pairs_per_epoch; start += cfg.batch_size) {
            const int n = std::min(cfg.batch_size, cfg.pairs_per_epoch - start);
            GcnGrad grad = GcnGrad::zeros_like(w);
            for (int k = 0; k < n; ++k) {
                const auto s = sampler.next();
                const GcnTrace ta = gcn_forward(pose_feature(*s.a.hand, w.channels), w);
                const GcnTrace tb = gcn_forward(pose_feature(*s.b.hand, w.channels), w);
                if (cfg.visual) {
                    const JointTrace ja = joint_forward(visual(s.a), ta.out, w);
                    const JointTrace jb = joint_forward(visual(s.b), tb.out, w);
                    const auto lr_ = contrastive_loss(ja.out, jb.out, s.label, cfg.margin);
                    total += lr_.loss;
                    const Embedding ga = joint_backward(ja, w, lr_.grad_a / n, grad);
                    const Embedding gb = joint_backward(jb, w, lr_.grad_b / n, grad);
                    gcn_backward(ta, w, ga, grad);
                    gcn_backward(tb, w, gb, grad);
                } else {
                    const auto l = contrastive_loss(ta.out, tb.out, s.label, cfg.margin);
                    total += l.loss;
                    gcn_backward(ta, w, l.grad_a / n, grad);
                    gcn_backward(tb, w, l.grad_b / n, grad);
                }
            }
            adam.step(w, grad, lr);
        }
        res.epoch_loss.push_back(total / cfg.pairs_per_epoch);
    }
    res.accuracy = pair_accuracy(ds, w, cfg.margin, cfg.eval_pairs, cfg.seed ^ 0x9e3779b97f4a7c15ULL,
                                 cfg.visual ? visual : VisualLookup{});
    return res;
}

}  // namespace handtrack
