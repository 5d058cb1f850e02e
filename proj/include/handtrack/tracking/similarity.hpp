#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "handtrack/data/types.hpp"

namespace handtrack {

inline double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

/// Mean Euclidean distance over joints annotated in both hands; +inf when
/// they share none.
inline double pose_l2(const HandInstance& a, const HandInstance& b) {
    double sum = 0.0;
    int n = 0;
    for (int j = 0; j < kNumJoints; ++j) {
        const auto& p = a.keypoints[j];
        const auto& q = b.keypoints[j];
        if (!p.annotated() || !q.annotated()) continue;
        sum += std::hypot(p.x - q.x, p.y - q.y);
        ++n;
    }
    return n ? sum / n : std::numeric_limits<double>::infinity();
}

/// Maps a distance in [0, inf] onto a similarity in [0, 1].
inline double distance_to_similarity(double d) { return std::isinf(d) ? 0.0 : 1.0 / (1.0 + d); }

}  // namespace handtrack
