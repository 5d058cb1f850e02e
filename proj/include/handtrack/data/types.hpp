#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace handtrack {

inline constexpr int kNumJoints = 21;

/// Visibility codes as stored in annotation files. Larger means more visible.
enum class Visibility : std::uint8_t { NotAvailable = 0, Occluded = 1, Visible = 2 };

enum class HandSide : std::uint8_t { Left, Right };

inline std::string_view to_string(HandSide s) { return s == HandSide::Left ? "left" : "right"; }

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Axis-aligned box anchored at its top-left corner.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double size() const { return w > h ? w : h; }
    Point2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    Visibility vis = Visibility::NotAvailable;

    bool annotated() const { return vis != Visibility::NotAvailable; }
    Point2 pos() const { return {x, y}; }
    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

// Canonical joint order: wrist, then thumb..pinky, each mcp, pip, dip, tip.
inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "wrist",
    "thumb_mcp",  "thumb_pip",  "thumb_dip",  "thumb_tip",
    "index_mcp",  "index_pip",  "index_dip",  "index_tip",
    "middle_mcp", "middle_pip", "middle_dip", "middle_tip",
    "ring_mcp",   "ring_pip",   "ring_dip",   "ring_tip",
    "pinky_mcp",  "pinky_pip",  "pinky_dip",  "pinky_tip",
};

inline constexpr std::array<std::string_view, 6> kJointGroups = {"wrist", "thumb", "index",
                                                                 "middle", "ring", "pinky"};

/// Group index (0 = wrist, 1..5 = thumb..pinky) of a joint.
constexpr int joint_group(int joint) { return joint == 0 ? 0 : 1 + (joint - 1) / 4; }

using KeypointArray = std::array<Keypoint, kNumJoints>;

struct HandInstance {
    std::string track_id;
    HandSide hand_side = HandSide::Right;
    BBox bbox;
    KeypointArray keypoints{};
    double score = 1.0;
    /// Per-joint confidences of a prediction (heatmap peak values).
    std::optional<std::array<double, kNumJoints>> keypoint_scores;
    /// Track id of the heatmap prior chosen for this prediction, if any.
    /// Only meaningful on tracker output; serialized as "matched_prior".
    std::optional<std::string> matched_prior;
    bool has_matched_prior_field = false;

    double joint_score(int j) const { return keypoint_scores ? (*keypoint_scores)[j] : score; }
    friend bool operator==(const HandInstance&, const HandInstance&) = default;
};

struct FrameAnnotation {
    std::int64_t frame_id = 0;
    int width = 0;
    int height = 0;
    std::vector<HandInstance> hands;
    friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

struct ClipAnnotation {
    std::string clip_id;
    std::string video_id;
    double fps = 8.0;
    std::vector<FrameAnnotation> frames;
    friend bool operator==(const ClipAnnotation&, const ClipAnnotation&) = default;
};

struct Dataset {
    std::vector<ClipAnnotation> clips;

    const ClipAnnotation* find_clip(std::string_view id) const {
        for (const auto& c : clips)
            if (c.clip_id == id) return &c;
        return nullptr;
    }
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace handtrack
