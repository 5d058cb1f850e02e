#pragma once

#include <string>

#include "handtrack/data/types.hpp"

namespace testing_helpers {

// A hand with every keypoint visible, laid out on a 3x7 lattice inside the box.
inline handtrack::HandInstance lattice_hand(double x, double y, double size, std::string id = "") {
    handtrack::HandInstance h;
    h.track_id = std::move(id);
    h.bbox = {x, y, size, size};
    for (int j = 0; j < handtrack::kNumJoints; ++j)
        h.keypoints[j] = {x + size * (0.2 + 0.3 * (j % 3)), y + size * (0.1 + 0.13 * (j / 3)),
                          handtrack::Visibility::Visible};
    return h;
}

inline handtrack::ClipAnnotation one_frame_clip(std::string clip, std::string video,
                                                std::vector<handtrack::HandInstance> hands) {
    return {std::move(clip), std::move(video), 8.0, {{0, 640, 480, std::move(hands)}}};
}

}  // namespace testing_helpers
