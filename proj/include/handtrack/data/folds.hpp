#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "handtrack/data/types.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

struct Fold {
    int fold_id = 0;
    std::string video_id;
    std::set<std::string> train_clip_ids;
    std::set<std::string> val_clip_ids;
    /// Single-video datasets leave nothing to train on.
    bool degenerate = false;
};

/// Leave-one-video-out folds, ordered by video_id.
inline std::vector<Fold> make_folds(const Dataset& ds) {
    if (ds.clips.empty()) throw DataError("cannot fold an empty dataset");
    std::map<std::string, std::set<std::string>> by_video;
    for (const auto& c : ds.clips) {
        if (c.video_id.empty()) throw DataError("clip '" + c.clip_id + "' has no video_id");
        by_video[c.video_id].insert(c.clip_id);
    }
    std::vector<Fold> folds;
    int k = 0;
    for (const auto& [video, clips] : by_video) {
        Fold f;
        f.fold_id = k++;
        f.video_id = video;
        f.val_clip_ids = clips;
        for (const auto& c : ds.clips)
            if (c.video_id != video) f.train_clip_ids.insert(c.clip_id);
        f.degenerate = f.train_clip_ids.empty();
        folds.push_back(std::move(f));
    }
    return folds;
}

struct DatasetStats {
    std::size_t clips = 0;
    std::size_t videos = 0;
    std::size_t frames = 0;
    std::size_t annotations = 0;  // hand instances
    std::size_t tracks = 0;       // distinct (clip, track_id)
    double mean_hands_per_frame = 0.0;
    std::size_t median_hands_per_frame = 0;
    std::size_t max_hands_per_frame = 0;
};

inline DatasetStats dataset_stats(const Dataset& ds) {
    DatasetStats s;
    s.clips = ds.clips.size();
    std::set<std::string> videos;
    std::set<std::pair<std::string, std::string>> tracks;
    std::vector<std::size_t> per_frame;
    for (const auto& c : ds.clips) {
        videos.insert(c.video_id);
        for (const auto& f : c.frames) {
            per_frame.push_back(f.hands.size());
            s.annotations += f.hands.size();
            for (const auto& h : f.hands)
                if (!h.track_id.empty()) tracks.emplace(c.clip_id, h.track_id);
        }
    }
    s.videos = videos.size();
    s.frames = per_frame.size();
    s.tracks = tracks.size();
    if (!per_frame.empty()) {
        s.mean_hands_per_frame = static_cast<double>(s.annotations) / static_cast<double>(s.frames);
        std::sort(per_frame.begin(), per_frame.end());
        s.median_hands_per_frame = per_frame[per_frame.size() / 2];
        s.max_hands_per_frame = per_frame.back();
    }
    return s;
}

}  // namespace handtrack
