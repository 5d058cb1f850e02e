#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "handtrack/data/types.hpp"

namespace handtrack {

/// Distances are normalized by ratio * bbox size; a joint is correct when
/// the normalized distance is below sigma.
struct MatchThreshold {
    double ratio = 0.2;
    double sigma = 0.5;

    double radius(const BBox& b) const { return sigma * ratio * b.size(); }
};

struct EvalOptions {
    MatchThreshold thr;
    /// Occluded ground-truth joints are scored (they carry a position).
    bool occluded_counts = true;
    /// Predicted joints with lower confidence are ignored when set.
    std::optional<double> min_joint_confidence;
};

inline double normalized_distance(Point2 pred, Point2 gt, const BBox& gt_box, const MatchThreshold& thr) {
    return std::hypot(pred.x - gt.x, pred.y - gt.y) / (thr.ratio * gt_box.size());
}

inline bool pck_correct(Point2 pred, Point2 gt, const BBox& gt_box, const MatchThreshold& thr) {
    return normalized_distance(pred, gt, gt_box, thr) < thr.sigma;
}

inline bool gt_joint_counts(const HandInstance& gt, int j, const EvalOptions& opt) {
    const auto v = gt.keypoints[j].vis;
    return v == Visibility::Visible || (opt.occluded_counts && v == Visibility::Occluded);
}

inline bool pred_joint_counts(const HandInstance& pred, int j, const EvalOptions& opt) {
    if (!pred.keypoints[j].annotated()) return false;
    return !opt.min_joint_confidence || pred.joint_score(j) >= *opt.min_joint_confidence;
}

/// Fraction of the ground truth's scored joints that the prediction hits.
inline double pose_pck(const HandInstance& pred, const HandInstance& gt, const EvalOptions& opt) {
    int total = 0, hit = 0;
    for (int j = 0; j < kNumJoints; ++j) {
        if (!gt_joint_counts(gt, j, opt)) continue;
        ++total;
        if (pred_joint_counts(pred, j, opt) &&
            pck_correct(pred.keypoints[j].pos(), gt.keypoints[j].pos(), gt.bbox, opt.thr))
            ++hit;
    }
    return total ? static_cast<double>(hit) / total : 0.0;
}

struct PoseAssignment {
    std::vector<int> pred_to_gt;  // -1 = unassigned
    std::vector<int> gt_to_pred;
};

/// Greedy one-to-one assignment by descending pose PCK; ties go to the
/// lower prediction index, then the lower ground-truth index. Pairs with
/// zero PCK are never assigned.
inline PoseAssignment assign_poses(const std::vector<HandInstance>& preds, const std::vector<HandInstance>& gts,
                                   const EvalOptions& opt) {
    struct Edge {
        double pck;
        int p, g;
    };
    std::vector<Edge> edges;
    for (int p = 0; p < static_cast<int>(preds.size()); ++p)
        for (int g = 0; g < static_cast<int>(gts.size()); ++g)
            if (const double s = pose_pck(preds[p], gts[g], opt); s > 0.0) edges.push_back({s, p, g});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.pck != b.pck) return a.pck > b.pck;
        if (a.p != b.p) return a.p < b.p;
        return a.g < b.g;
    });
    PoseAssignment out{std::vector<int>(preds.size(), -1), std::vector<int>(gts.size(), -1)};
    for (const auto& e : edges) {
        if (out.pred_to_gt[e.p] >= 0 || out.gt_to_pred[e.g] >= 0) continue;
        out.pred_to_gt[e.p] = e.g;
        out.gt_to_pred[e.g] = e.p;
    }
    return out;
}

struct ScoredJoint {
    double confidence;
    bool true_positive;
};

/// All-point interpolated average precision in [0, 1]; nullopt when there
/// is no ground truth. Equal confidences keep their input order.
inline std::optional<double> average_precision(std::vector<ScoredJoint> dets, std::size_t n_gt) {
    if (n_gt == 0) return std::nullopt;
    std::stable_sort(dets.begin(), dets.end(),
                     [](const ScoredJoint& a, const ScoredJoint& b) { return a.confidence > b.confidence; });
    std::vector<double> precision, recall;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        tp += dets[i].true_positive;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    }
    // precision envelope, right to left
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

}  // namespace handtrack
