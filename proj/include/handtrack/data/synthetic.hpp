#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <utility>

#include "handtrack/data/types.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

struct SynthSpec {
    int n_clips = 4;
    int n_videos = 2;  // clips are assigned round-robin to videos
    int n_frames = 16;
    int n_hands = 3;
    int width = 640;
    int height = 480;
    double hand_size = 96.0;        // template scale in px
    double motion_amplitude = 4.0;  // max L-inf keypoint displacement per frame, px
    double occlusion_rate = 0.0;    // probability a detection is dropped
    double detector_noise = 0.0;    // sigma of detection jitter, px
    double occluded_joint_rate = 0.1;
    double fps = 8.0;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    Dataset gt;
    Dataset detections;
};

namespace synth_detail {

struct HandParams {
    double cx = 0.0, cy = 0.0;
    double angle = 0.0;
    double scale = 1.0;
    std::array<double, 5> curl{};
};

struct FingerShape {
    double base_angle;
    double palm_length;
    double segment;
    double curl_sign;
};

inline constexpr std::array<FingerShape, 5> kFingers = {{
    {-1.05, 0.22, 0.17, 1.0},   // thumb
    {-0.28, 0.42, 0.17, 1.0},   // index
    {0.00, 0.44, 0.18, 1.0},    // middle
    {0.24, 0.42, 0.17, -1.0},   // ring
    {0.46, 0.38, 0.14, -1.0},   // pinky
}};

/// Template skeleton posed by `p`, in full-frame pixels.
inline std::array<Point2, kNumJoints> pose_points(const HandParams& p) {
    std::array<Point2, kNumJoints> local{};
    local[0] = {0.0, 0.45};
    for (int f = 0; f < 5; ++f) {
        const auto& fs = kFingers[f];
        auto dir = [](double a) { return Point2{std::sin(a), -std::cos(a)}; };
        Point2 cur{local[0].x + fs.palm_length * dir(fs.base_angle).x,
                   local[0].y + fs.palm_length * dir(fs.base_angle).y};
        local[1 + 4 * f] = cur;
        const double lengths[3] = {1.0, 0.8, 0.65};
        for (int s = 0; s < 3; ++s) {
            const double a = fs.base_angle + fs.curl_sign * p.curl[f] * (s + 1);
            cur = {cur.x + fs.segment * lengths[s] * dir(a).x, cur.y + fs.segment * lengths[s] * dir(a).y};
            local[2 + 4 * f + s] = cur;
        }
    }
    const double c = std::cos(p.angle), s = std::sin(p.angle);
    std::array<Point2, kNumJoints> out{};
    for (int j = 0; j < kNumJoints; ++j) {
        const double x = local[j].x * p.scale, y = local[j].y * p.scale;
        out[j] = {p.cx + c * x - s * y, p.cy + s * x + c * y};
    }
    return out;
}

inline BBox bbox_of(const std::array<Point2, kNumJoints>& pts, double pad) {
    double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
    for (const auto& q : pts) {
        x0 = std::min(x0, q.x);
        x1 = std::max(x1, q.x);
        y0 = std::min(y0, q.y);
        y1 = std::max(y1, q.y);
    }
    return {x0 - pad, y0 - pad, (x1 - x0) + 2 * pad, (y1 - y0) + 2 * pad};
}

inline bool inside(const BBox& b, const BBox& cell) {
    return b.x >= cell.x && b.y >= cell.y && b.x + b.w <= cell.x + cell.w && b.y + b.h <= cell.y + cell.h;
}

inline double linf_motion(const std::array<Point2, kNumJoints>& a, const std::array<Point2, kNumJoints>& b) {
    double d = 0.0;
    for (int j = 0; j < kNumJoints; ++j) d = std::max({d, std::abs(a[j].x - b[j].x), std::abs(a[j].y - b[j].y)});
    return d;
}

inline HandParams blend(const HandParams& a, const HandParams& b, double t) {
    HandParams r = a;
    r.cx = a.cx + t * (b.cx - a.cx);
    r.cy = a.cy + t * (b.cy - a.cy);
    r.angle = a.angle + t * (b.angle - a.angle);
    for (int f = 0; f < 5; ++f) r.curl[f] = a.curl[f] + t * (b.curl[f] - a.curl[f]);
    return r;
}

struct TrackMotion {
    HandParams base;
    double drift_x = 0.0, drift_y = 0.0;
    double wobble = 0.0, omega = 0.0, phase = 0.0;
    double rot_amp = 0.0, rot_omega = 0.0;
    std::array<double, 5> curl_phase{};
};

}  // namespace synth_detail

/// Ground-truth clips of hands moving smoothly inside disjoint grid cells,
/// plus detector-like copies (jittered, randomly dropped, ids stripped).
inline SyntheticData generate_synthetic_dataset(const SynthSpec& spec) {
    using namespace synth_detail;
    if (spec.n_clips < 1 || spec.n_frames < 1 || spec.n_hands < 1 || spec.n_videos < 1)
        throw ConfigError("synthetic counts must be >= 1");
    if (spec.width <= 0 || spec.height <= 0 || !(spec.hand_size > 0.0))
        throw ConfigError("synthetic frame and hand sizes must be positive");
    if (spec.motion_amplitude < 0.0 || spec.detector_noise < 0.0 || spec.occlusion_rate < 0.0 ||
        spec.occlusion_rate > 1.0 || spec.occluded_joint_rate < 0.0 || spec.occluded_joint_rate > 1.0)
        throw ConfigError("synthetic rates out of range");

    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.n_hands))));
    const int rows = (spec.n_hands + cols - 1) / cols;
    const double cell_w = static_cast<double>(spec.width) / cols;
    const double cell_h = static_cast<double>(spec.height) / rows;
    const double pad = 0.08 * spec.hand_size;

    // Neutral template with a 25% margin for rotation and curl must fit a cell.
    {
        HandParams probe;
        probe.scale = spec.hand_size;
        const auto pts = pose_points(probe);
        const BBox b = bbox_of(pts, pad);
        if (b.w * 1.25 > cell_w || b.h * 1.25 > cell_h)
            throw ConfigError("hands of size " + std::to_string(spec.hand_size) + " px cannot fit " +
                              std::to_string(spec.n_hands) + " per " + std::to_string(spec.width) + "x" +
                              std::to_string(spec.height) + " frame");
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    SyntheticData out;
    for (int c = 0; c < spec.n_clips; ++c) {
        ClipAnnotation gt_clip;
        char buf[32];
        std::snprintf(buf, sizeof buf, "clip_%03d", c);
        gt_clip.clip_id = buf;
        std::snprintf(buf, sizeof buf, "video_%02d", c % spec.n_videos);
        gt_clip.video_id = buf;
        gt_clip.fps = spec.fps;

        std::vector<TrackMotion> motions(spec.n_hands);
        std::vector<HandParams> state(spec.n_hands);
        std::vector<BBox> cells(spec.n_hands);
        std::vector<HandSide> sides(spec.n_hands);
        const double amp = spec.motion_amplitude;
        for (int h = 0; h < spec.n_hands; ++h) {
            cells[h] = {(h % cols) * cell_w, (h / cols) * cell_h, cell_w, cell_h};
            auto& m = motions[h];
            m.base.cx = cells[h].x + 0.5 * cell_w;
            m.base.cy = cells[h].y + 0.5 * cell_h;
            m.base.scale = spec.hand_size * uniform(0.9, 1.0);
            m.base.angle = uniform(-0.6, 0.6);
            for (auto& cu : m.base.curl) cu = uniform(0.0, 0.5);
            m.drift_x = uniform(-0.3, 0.3) * amp;
            m.drift_y = uniform(-0.3, 0.3) * amp;
            m.wobble = uniform(0.1, 0.3) * amp;
            m.omega = uniform(0.2, 0.6);
            m.phase = uniform(0.0, 6.283185307179586);
            m.rot_amp = uniform(0.0, 0.15);
            m.rot_omega = uniform(0.1, 0.4);
            for (auto& ph : m.curl_phase) ph = uniform(0.0, 6.283185307179586);
            sides[h] = unit(rng) < 0.5 ? HandSide::Left : HandSide::Right;
            state[h] = m.base;
            if (!inside(bbox_of(pose_points(state[h]), pad), cells[h]))
                throw ConfigError("hand does not fit its cell at the requested size");
        }

        for (int t = 0; t < spec.n_frames; ++t) {
            FrameAnnotation fr;
            fr.frame_id = t;
            fr.width = spec.width;
            fr.height = spec.height;
            for (int h = 0; h < spec.n_hands; ++h) {
                auto& m = motions[h];
                if (t > 0) {
                    const auto prev_pts = pose_points(state[h]);
                    HandParams target = state[h];
                    target.cx += m.drift_x + m.wobble * std::sin(m.omega * t + m.phase);
                    target.cy += m.drift_y + m.wobble * std::cos(m.omega * t + m.phase);
                    target.angle = m.base.angle + m.rot_amp * std::sin(m.rot_omega * t);
                    for (int f = 0; f < 5; ++f)
                        target.curl[f] = std::clamp(m.base.curl[f] + 0.15 * std::sin(0.3 * t + m.curl_phase[f]), 0.0, 0.7);
                    if (!inside(bbox_of(pose_points(target), pad), cells[h])) {
                        // bounce off the cell wall
                        m.drift_x = -m.drift_x;
                        m.drift_y = -m.drift_y;
                        target.cx = state[h].cx + m.drift_x;
                        target.cy = state[h].cy + m.drift_y;
                    }
                    double lambda = 1.0;
                    HandParams next = target;
                    for (int it = 0; it < 40; ++it) {
                        next = blend(state[h], target, lambda);
                        const auto pts = pose_points(next);
                        if (linf_motion(pts, prev_pts) <= amp && inside(bbox_of(pts, pad), cells[h])) break;
                        lambda *= 0.5;
                        if (it == 39) next = state[h];
                    }
                    state[h] = next;
                }
                const auto pts = pose_points(state[h]);
                HandInstance hand;
                hand.track_id = "h" + std::to_string(h);
                hand.hand_side = sides[h];
                hand.bbox = bbox_of(pts, pad);
                hand.score = 1.0;
                for (int j = 0; j < kNumJoints; ++j) {
                    hand.keypoints[j].x = pts[j].x;
                    hand.keypoints[j].y = pts[j].y;
                    hand.keypoints[j].vis =
                        unit(rng) < spec.occluded_joint_rate ? Visibility::Occluded : Visibility::Visible;
                }
                fr.hands.push_back(std::move(hand));
            }
            gt_clip.frames.push_back(std::move(fr));
        }

        ClipAnnotation det_clip = gt_clip;
        for (auto& fr : det_clip.frames) {
            std::vector<HandInstance> kept;
            for (auto& hand : fr.hands) {
                const bool dropped = unit(rng) < spec.occlusion_rate;
                hand.track_id.clear();
                if (spec.detector_noise > 0.0) {
                    const double s = spec.detector_noise;
                    const double max_x = std::nextafter(static_cast<double>(fr.width), 0.0);
                    const double max_y = std::nextafter(static_cast<double>(fr.height), 0.0);
                    for (auto& kp : hand.keypoints) {
                        kp.x = std::clamp(kp.x + s * gauss(rng), 0.0, max_x);
                        kp.y = std::clamp(kp.y + s * gauss(rng), 0.0, max_y);
                    }
                    hand.bbox.x += s * gauss(rng);
                    hand.bbox.y += s * gauss(rng);
                    hand.bbox.w = std::max(1.0, hand.bbox.w + s * gauss(rng));
                    hand.bbox.h = std::max(1.0, hand.bbox.h + s * gauss(rng));
                }
                if (!dropped) kept.push_back(std::move(hand));
            }
            fr.hands = std::move(kept);
        }
        out.gt.clips.push_back(std::move(gt_clip));
        out.detections.clips.push_back(std::move(det_clip));
    }
    return out;
}

}  // namespace handtrack
