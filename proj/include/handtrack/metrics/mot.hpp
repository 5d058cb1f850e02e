#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "handtrack/data/types.hpp"
#include "handtrack/error.hpp"
#include "handtrack/metrics/pck.hpp"

namespace handtrack {

/// Per-joint-type tallies of CLEAR-MOT events plus AP inputs.
struct JointEvents {
    std::size_t gt = 0;
    std::size_t matches = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t idsw = 0;
    double motp_sum = 0.0;  // sum over matches of 1 - d_norm / sigma
    std::vector<ScoredJoint> scored;  // every counted predicted joint

    void merge(const JointEvents& o) {
        gt += o.gt;
        matches += o.matches;
        fn += o.fn;
        fp += o.fp;
        idsw += o.idsw;
        motp_sum += o.motp_sum;
        scored.insert(scored.end(), o.scored.begin(), o.scored.end());
    }
};

struct MotEvents {
    std::array<JointEvents, kNumJoints> joints{};

    void merge(const MotEvents& o) {
        for (int j = 0; j < kNumJoints; ++j) joints[j].merge(o.joints[j]);
    }
};

/// Sequential accumulator for one clip. Keeps, per ground-truth joint, the
/// prediction track it was last matched to; that memory is dropped once
/// the ground-truth hand leaves the frame.
class MotAccumulator {
public:
    explicit MotAccumulator(EvalOptions opt) : opt_(std::move(opt)) {}

    void add_frame(std::int64_t frame_id, const std::vector<HandInstance>& gts, const std::vector<HandInstance>& preds) {
        if (last_frame_ && frame_id <= *last_frame_)
            throw DataError("metrics: frame " + std::to_string(frame_id) + " does not follow frame " +
                            std::to_string(*last_frame_));
        last_frame_ = frame_id;

        const PoseAssignment asg = assign_poses(preds, gts, opt_);
        std::set<std::string> present;
        for (const auto& g : gts)
            if (!g.track_id.empty()) present.insert(g.track_id);
        for (auto it = last_match_.begin(); it != last_match_.end();)
            it = present.count(it->first.first) ? std::next(it) : last_match_.erase(it);

        for (int j = 0; j < kNumJoints; ++j) {
            auto& ev = events_.joints[j];
            std::size_t n_gt = 0, n_pred = 0, n_match = 0;
            std::vector<bool> pred_hit(preds.size(), false);
            for (int g = 0; g < static_cast<int>(gts.size()); ++g) {
                if (!gt_joint_counts(gts[g], j, opt_)) continue;
                ++n_gt;
                const int p = asg.gt_to_pred[g];
                if (p < 0 || !pred_joint_counts(preds[p], j, opt_)) continue;
                const double d = normalized_distance(preds[p].keypoints[j].pos(), gts[g].keypoints[j].pos(),
                                                     gts[g].bbox, opt_.thr);
                if (!(d < opt_.thr.sigma)) continue;
                ++n_match;
                pred_hit[p] = true;
                ev.motp_sum += std::clamp(1.0 - d / opt_.thr.sigma, 0.0, 1.0);
                if (!gts[g].track_id.empty()) {
                    const auto key = std::make_pair(gts[g].track_id, j);
                    auto it = last_match_.find(key);
                    if (it != last_match_.end() && it->second != preds[p].track_id) ++ev.idsw;
                    last_match_[key] = preds[p].track_id;
                }
            }
            for (int p = 0; p < static_cast<int>(preds.size()); ++p) {
                if (!pred_joint_counts(preds[p], j, opt_)) continue;
                ++n_pred;
                ev.scored.push_back({preds[p].joint_score(j), static_cast<bool>(pred_hit[p])});
            }
            ev.gt += n_gt;
            ev.matches += n_match;
            ev.fn += n_gt - n_match;
            ev.fp += n_pred - n_match;
        }
    }

    const MotEvents& events() const { return events_; }

private:
    EvalOptions opt_;
    MotEvents events_;
    std::optional<std::int64_t> last_frame_;
    std::map<std::pair<std::string, int>, std::string> last_match_;
};

/// Events for one clip; predicted frames are paired with ground truth by
/// frame_id and missing ones count as empty.
inline MotEvents evaluate_clip(const ClipAnnotation& gt, const ClipAnnotation* pred, const EvalOptions& opt) {
    std::map<std::int64_t, const FrameAnnotation*> pred_frames;
    if (pred) {
        for (const auto& f : pred->frames) pred_frames[f.frame_id] = &f;
        std::set<std::int64_t> gt_ids;
        for (const auto& f : gt.frames) gt_ids.insert(f.frame_id);
        for (const auto& [id, _] : pred_frames)
            if (!gt_ids.count(id))
                throw DataError("clip '" + gt.clip_id + "': predicted frame " + std::to_string(id) +
                                " has no ground truth");
    }
    static const std::vector<HandInstance> kNone;
    MotAccumulator acc(opt);
    for (const auto& f : gt.frames) {
        auto it = pred_frames.find(f.frame_id);
        acc.add_frame(f.frame_id, f.hands, it == pred_frames.end() ? kNone : it->second->hands);
    }
    return acc.events();
}

}  // namespace handtrack
