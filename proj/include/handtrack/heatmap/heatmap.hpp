#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "handtrack/data/types.hpp"
#include "handtrack/tensor.hpp"

namespace handtrack {

/// Square crop around a detection. Three coordinate frames are involved:
/// full-frame pixels, crop raster pixels in [0, in_res), and heatmap grid
/// coordinates in [0, out_res) where integer values are grid nodes.
struct CropWindow {
    double cx = 0.0;
    double cy = 0.0;
    double side = 1.0;
    int in_res = 256;
    int out_res = 64;

    double left() const { return cx - 0.5 * side; }
    double top() const { return cy - 0.5 * side; }
    /// Full-frame pixels per heatmap cell.
    double heatmap_pixel() const { return side / out_res; }

    Point2 to_crop(Point2 p) const { return {(p.x - left()) * in_res / side, (p.y - top()) * in_res / side}; }
    Point2 from_crop(Point2 q) const { return {q.x * side / in_res + left(), q.y * side / in_res + top()}; }
    Point2 to_heatmap(Point2 p) const { return {(p.x - left()) * out_res / side, (p.y - top()) * out_res / side}; }
    Point2 from_heatmap(Point2 q) const { return {q.x * side / out_res + left(), q.y * side / out_res + top()}; }

    friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

inline constexpr double kDefaultCropScale = 2.2;
inline constexpr int kDefaultInRes = 256;
inline constexpr int kDefaultOutRes = 64;
inline constexpr double kDefaultHeatmapSigma = 2.0;

/// Square window centered on the box, side = scale * longer box side.
inline CropWindow crop_window(const BBox& bbox, double scale = kDefaultCropScale, int in_res = kDefaultInRes,
                              int out_res = kDefaultOutRes) {
    if (!(bbox.w > 0.0) || !(bbox.h > 0.0)) throw std::invalid_argument("crop_window: non-positive bbox dimensions");
    if (!(scale > 0.0) || in_res <= 0 || out_res <= 0) throw std::invalid_argument("crop_window: bad scale or resolution");
    const Point2 c = bbox.center();
    return {c.x, c.y, scale * bbox.size(), in_res, out_res};
}

struct Heatmap {
    Tensor3 grid;
    CropWindow window;

    int joints() const { return grid.channels(); }

    static Heatmap zeros(int joints, const CropWindow& win) {
        return {Tensor3(joints, win.out_res, win.out_res), win};
    }
};

/// true = joint annotated.
using JointMask = std::vector<bool>;

inline std::pair<Heatmap, JointMask> render_gt_heatmap(const HandInstance& hand, const CropWindow& win,
                                                       double sigma = kDefaultHeatmapSigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("render_gt_heatmap: sigma must be positive");
    Heatmap hm = Heatmap::zeros(kNumJoints, win);
    JointMask mask(kNumJoints, false);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const int n = win.out_res;
    std::vector<double> gx(n), gy(n);
    for (int j = 0; j < kNumJoints; ++j) {
        const auto& kp = hand.keypoints[j];
        if (!kp.annotated()) continue;
        mask[j] = true;
        const Point2 c = win.to_heatmap(kp.pos());
        for (int i = 0; i < n; ++i) {
            gx[i] = std::exp(-(i - c.x) * (i - c.x) * inv2s2);
            gy[i] = std::exp(-(i - c.y) * (i - c.y) * inv2s2);
        }
        for (int v = 0; v < n; ++v)
            for (int u = 0; u < n; ++u) hm.grid(j, v, u) = static_cast<float>(gy[v] * gx[u]);
    }
    return {std::move(hm), std::move(mask)};
}

/// Sum of squared errors over annotated channels, normalized by the number
/// of annotated channels times the grid size. Zero when nothing is annotated.
inline double masked_mse(const Heatmap& gt, const Heatmap& pred, const JointMask& mask) {
    if (!gt.grid.same_shape(pred.grid))
        throw std::invalid_argument("masked_mse: shape mismatch " + gt.grid.shape() + " vs " + pred.grid.shape());
    if (static_cast<int>(mask.size()) != gt.joints())
        throw std::invalid_argument("masked_mse: mask length does not match channel count");
    double sum = 0.0;
    int active = 0;
    for (int j = 0; j < gt.joints(); ++j) {
        if (!mask[j]) continue;
        ++active;
        auto a = gt.grid.plane(j);
        auto b = pred.grid.plane(j);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            sum += d * d;
        }
    }
    if (active == 0) return 0.0;
    return sum / (static_cast<double>(active) * static_cast<double>(gt.grid.plane_size()));
}

struct Peak {
    Point2 pos;         // full frame
    double confidence;  // channel maximum
    int row = 0;
    int col = 0;
};

using PeakSet = std::vector<Peak>;

/// Per-channel argmax, ties to the row-major first cell, reprojected
/// through the heatmap's window.
inline PeakSet extract_peaks(const Heatmap& h) {
    PeakSet out;
    out.reserve(h.joints());
    const int rows = h.grid.height(), cols = h.grid.width();
    for (int j = 0; j < h.joints(); ++j) {
        int br = 0, bc = 0;
        float best = h.grid(j, 0, 0);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (h.grid(j, r, c) > best) {
                    best = h.grid(j, r, c);
                    br = r;
                    bc = c;
                }
        out.push_back({h.window.from_heatmap({static_cast<double>(bc), static_cast<double>(br)}), best, br, bc});
    }
    return out;
}

/// Arithmetic mean of the per-channel maxima, empty channels included.
inline double mean_peak(const Tensor3& grid) {
    double s = 0.0;
    for (int j = 0; j < grid.channels(); ++j) s += grid.channel_max(j);
    return s / grid.channels();
}

inline double mean_peak(const Heatmap& h) { return mean_peak(h.grid); }

/// Bilinear warp into `dst`; samples falling off the source grid read as 0.
inline Heatmap resample_to_window(const Heatmap& h, const CropWindow& dst) {
    Heatmap out = Heatmap::zeros(h.joints(), dst);
    const int n_src = h.grid.width();
    const int m_src = h.grid.height();
    auto at = [&](int j, int r, int c) -> double {
        if (r < 0 || c < 0 || r >= m_src || c >= n_src) return 0.0;
        return h.grid(j, r, c);
    };
    const int n = dst.out_res;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const Point2 src = h.window.to_heatmap(dst.from_heatmap({static_cast<double>(c), static_cast<double>(r)}));
            const double fx = std::floor(src.x), fy = std::floor(src.y);
            if (fx < -1.0 || fy < -1.0 || fx > n_src || fy > m_src) continue;
            const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
            const double ax = src.x - fx, ay = src.y - fy;
            for (int j = 0; j < h.joints(); ++j) {
                const double v = (1 - ay) * ((1 - ax) * at(j, y0, x0) + ax * at(j, y0, x0 + 1)) +
                                 ay * ((1 - ax) * at(j, y0 + 1, x0) + ax * at(j, y0 + 1, x0 + 1));
                out.grid(j, r, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace handtrack
