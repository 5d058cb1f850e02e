#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "handtrack/condpose/branches.hpp"
#include "handtrack/heatmap/heatmap.hpp"

namespace handtrack {

/// A track's stored heatmap prediction. The zeros prior has no track id.
struct PriorRecord {
    std::optional<std::string> track_id;
    std::int64_t frame_id = -1;
    Heatmap heatmap;
    double avg_peak = 0.0;

    bool is_zero() const { return !track_id.has_value(); }

    static PriorRecord from_heatmap(std::string track_id, std::int64_t frame_id, Heatmap h) {
        const double peak = mean_peak(h);
        return {std::move(track_id), frame_id, std::move(h), peak};
    }

    static PriorRecord zeros(int joints, const CropWindow& win) {
        return {std::nullopt, -1, Heatmap::zeros(joints, win), 0.0};
    }
};

struct CondConfig {
    int delta = 3;
    double peak_threshold = 0.20;
    bool clamp_outputs = false;

    void validate() const {
        if (delta < 1) throw std::invalid_argument("delta must be >= 1");
        if (!(peak_threshold >= 0.0 && peak_threshold <= 1.0))
            throw std::invalid_argument("peak_threshold must lie in [0, 1]");
    }
};

/// Prior for frame t from one track's frame-sorted history: the record at
/// t - delta, else the latest one before t - delta, else the latest one
/// before t (young tracks), else nullopt (caller substitutes zeros).
inline const PriorRecord* select_prior(const std::vector<PriorRecord>& history, std::int64_t t, const CondConfig& cfg) {
    const std::int64_t target = t - cfg.delta;
    const PriorRecord* before_target = nullptr;
    const PriorRecord* before_t = nullptr;
    for (const auto& r : history) {
        if (r.frame_id == target) return &r;
        if (r.frame_id < target) before_target = &r;
        if (r.frame_id < t) before_t = &r;
    }
    return before_target ? before_target : before_t;
}

inline PriorRecord select_prior_or_zeros(const std::vector<PriorRecord>& history, std::int64_t t,
                                         const CondConfig& cfg, int joints, const CropWindow& win) {
    if (const auto* r = select_prior(history, t, cfg)) return *r;
    return PriorRecord::zeros(joints, win);
}

/// Admissible priors for a detection window, already aligned into it.
/// Drops priors that land entirely outside the window or whose average
/// peak is below the threshold; falls back to the zeros prior.
inline std::vector<PriorRecord> filter_priors(const std::vector<PriorRecord>& priors, const CropWindow& det_window,
                                              const CondConfig& cfg, int joints = kNumJoints) {
    std::vector<PriorRecord> kept;
    for (const auto& p : priors) {
        if (p.is_zero() || p.avg_peak < cfg.peak_threshold) continue;
        Heatmap aligned = resample_to_window(p.heatmap, det_window);
        if (aligned.grid.all_zero()) continue;
        kept.push_back({p.track_id, p.frame_id, std::move(aligned), p.avg_peak});
    }
    if (kept.empty()) kept.push_back(PriorRecord::zeros(joints, det_window));
    return kept;
}

/// Training-time probability of conditioning on a predicted prior rather
/// than the ground-truth one.
inline double curriculum_prior_prob(int epoch) {
    if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");
    return std::min(1.0, 0.10 * epoch);
}

struct DetectionInput {
    Heatmap initial;  // base network output for this crop
    Tensor3 features;  // 64-channel visual features on the heatmap raster
};

struct ConditionalOutput {
    Heatmap heatmap;
    std::optional<std::string> prior_track_id;
    double mean_peak = 0.0;
};

/// Conditional prediction for every detection of a frame: each admissible
/// prior is weighted by the attention branch and fused with the initial
/// heatmap; the output with the highest mean peak wins, ties going to the
/// lowest track id.
inline std::vector<ConditionalOutput> predict_frame(const std::vector<DetectionInput>& dets,
                                                    const std::vector<PriorRecord>& priors, const CondWeights& w,
                                                    const CondConfig& cfg) {
    std::vector<ConditionalOutput> out;
    out.reserve(dets.size());
    for (const auto& det : dets) {
        auto candidates = filter_priors(priors, det.initial.window, cfg, det.initial.joints());
        std::sort(candidates.begin(), candidates.end(),
                  [](const PriorRecord& a, const PriorRecord& b) { return a.track_id < b.track_id; });
        std::optional<ConditionalOutput> best;
        for (const auto& prior : candidates) {
            Heatmap weighted = attention_forward(det.features, prior.heatmap, w.attention);
            Heatmap fused = fuse_forward(det.initial, weighted, w.fusion, cfg.clamp_outputs);
            const double score = mean_peak(fused);
            if (!best || score > best->mean_peak) best = ConditionalOutput{std::move(fused), prior.track_id, score};
        }
        out.push_back(std::move(*best));
    }
    return out;
}

}  // namespace handtrack
