#pragma once

#include <set>
#include <string>
#include <vector>

#include "handtrack/data/types.hpp"

namespace handtrack {

struct Violation {
    std::string clip_id;
    std::int64_t frame_id = -1;  // -1: clip-level
    int hand_index = -1;         // -1: frame-level
    std::string message;

    std::string to_string() const {
        std::string s = "clip '" + clip_id + "'";
        if (frame_id >= 0) s += ", frame " + std::to_string(frame_id);
        if (hand_index >= 0) s += ", hand " + std::to_string(hand_index);
        return s + ": " + message;
    }
};

using ValidationReport = std::vector<Violation>;

inline ValidationReport validate_dataset(const Dataset& ds) {
    ValidationReport out;
    std::set<std::string> clip_ids;
    for (const auto& clip : ds.clips) {
        auto add = [&](std::int64_t f, int h, std::string msg) {
            out.push_back({clip.clip_id, f, h, std::move(msg)});
        };
        if (!clip_ids.insert(clip.clip_id).second) add(-1, -1, "duplicate clip_id");
        if (clip.video_id.empty()) add(-1, -1, "empty video_id");
        if (clip.frames.empty()) {
            add(-1, -1, "clip has no frames");
            continue;
        }
        if (!(clip.fps > 0.0)) add(-1, -1, "non-positive fps");
        const int width = clip.frames.front().width;
        const int height = clip.frames.front().height;
        std::int64_t prev_frame = 0;
        bool first = true;
        for (const auto& fr : clip.frames) {
            if (!first && fr.frame_id <= prev_frame) add(fr.frame_id, -1, "frame_id not strictly increasing");
            first = false;
            prev_frame = fr.frame_id;
            if (fr.width != width || fr.height != height) add(fr.frame_id, -1, "frame size differs within clip");
            if (fr.width <= 0 || fr.height <= 0) add(fr.frame_id, -1, "non-positive frame size");
            std::set<std::string> ids;
            for (int h = 0; h < static_cast<int>(fr.hands.size()); ++h) {
                const auto& hand = fr.hands[h];
                if (!hand.track_id.empty() && !ids.insert(hand.track_id).second)
                    add(fr.frame_id, h, "duplicate track_id '" + hand.track_id + "'");
                if (!(hand.bbox.w > 0.0) || !(hand.bbox.h > 0.0)) add(fr.frame_id, h, "degenerate bbox");
                if (!(hand.score >= 0.0 && hand.score <= 1.0)) add(fr.frame_id, h, "score outside [0,1]");
                for (int j = 0; j < kNumJoints; ++j) {
                    const auto& kp = hand.keypoints[j];
                    if (!kp.annotated()) continue;
                    if (!(kp.x >= 0.0 && kp.x < fr.width && kp.y >= 0.0 && kp.y < fr.height))
                        add(fr.frame_id, h, "keypoint outside frame (joint " + std::to_string(j) + ")");
                }
            }
        }
    }
    return out;
}

}  // namespace handtrack
