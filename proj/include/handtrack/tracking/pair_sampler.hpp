#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "handtrack/data/types.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

enum class PairKind { Positive, NegativeSameVideo, NegativeOtherVideo };

struct HandRef {
    const HandInstance* hand = nullptr;
    int clip = 0;
    int frame = 0;  // index into the clip's frame list
    int index = 0;  // index into the frame's hand list
};

struct PairSample {
    HandRef a;
    HandRef b;
    int label = 0;  // 1 = same hand
    PairKind kind = PairKind::Positive;
};

struct PairMix {
    double positive = 0.5;
    double same_video = 0.4;
    double other_video = 0.1;
};

/// Draws training pairs: positives are one track on adjacent frames;
/// negatives pair different tracks from the same or another video. With a
/// single video the other-video mass moves to same-video negatives (and
/// vice versa when no video holds two tracks).
class PairSampler {
public:
    PairSampler(const Dataset& ds, std::uint64_t seed, PairMix mix = {}) : rng_(seed), mix_(mix) {
        std::map<std::pair<int, std::string>, int> track_index;
        std::map<std::string, int> video_index;
        for (int c = 0; c < static_cast<int>(ds.clips.size()); ++c) {
            const auto& clip = ds.clips[c];
            auto [vit, _] = video_index.emplace(clip.video_id, static_cast<int>(video_index.size()));
            const int video = vit->second;
            if (static_cast<int>(video_hands_.size()) <= video) video_hands_.resize(video + 1);
            std::map<int, std::pair<int, int>> last_seen;  // track -> (frame idx, hand idx)
            for (int f = 0; f < static_cast<int>(clip.frames.size()); ++f) {
                const auto& fr = clip.frames[f];
                for (int h = 0; h < static_cast<int>(fr.hands.size()); ++h) {
                    const auto& hand = fr.hands[h];
                    if (hand.track_id.empty()) continue;
                    auto [tit, inserted] =
                        track_index.emplace(std::make_pair(c, hand.track_id), static_cast<int>(track_index.size()));
                    const int track = tit->second;
                    if (inserted) track_video_.push_back(video);
                    const HandRef ref{&hand, c, f, h};
                    hands_.push_back({ref, track, video});
                    video_hands_[video].push_back(static_cast<int>(hands_.size()) - 1);
                    if (auto it = last_seen.find(track); it != last_seen.end() && it->second.first == f - 1) {
                        const auto& prev = clip.frames[f - 1].hands[it->second.second];
                        adjacent_.push_back({HandRef{&prev, c, f - 1, it->second.second}, ref});
                    }
                    last_seen[track] = {f, h};
                }
            }
        }
        if (track_video_.size() < 2) throw DataError("pair sampler needs at least two tracks");
        if (adjacent_.empty()) throw DataError("pair sampler found no track on adjacent frames");

        std::vector<std::map<int, int>> tracks_per_video(video_hands_.size());
        for (const auto& e : hands_) tracks_per_video[e.video][e.track]++;
        for (std::size_t v = 0; v < video_hands_.size(); ++v)
            if (tracks_per_video[v].size() >= 2)
                for (int idx : video_hands_[v]) same_video_candidates_.push_back(idx);
        const bool has_same = !same_video_candidates_.empty();
        const bool has_other = video_hands_.size() >= 2;
        if (!has_other) {
            mix_.same_video += mix_.other_video;
            mix_.other_video = 0.0;
        }
        if (!has_same) {
            mix_.other_video += mix_.same_video;
            mix_.same_video = 0.0;
        }
    }

    const PairMix& effective_mix() const { return mix_; }

    PairSample next() {
        const double u = unit_(rng_);
        if (u < mix_.positive) {
            const auto& p = adjacent_[pick(adjacent_.size())];
            return {p.first, p.second, 1, PairKind::Positive};
        }
        if (u < mix_.positive + mix_.same_video) {
            const auto& a = hands_[same_video_candidates_[pick(same_video_candidates_.size())]];
            const auto& pool = video_hands_[a.video];
            for (;;) {
                const auto& b = hands_[pool[pick(pool.size())]];
                if (b.track != a.track) return {a.ref, b.ref, 0, PairKind::NegativeSameVideo};
            }
        }
        const auto& a = hands_[pick(hands_.size())];
        for (;;) {
            const auto& b = hands_[pick(hands_.size())];
            if (b.video != a.video) return {a.ref, b.ref, 0, PairKind::NegativeOtherVideo};
        }
    }

private:
    struct Entry {
        HandRef ref;
        int track;
        int video;
    };

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    PairMix mix_;
    std::vector<Entry> hands_;
    std::vector<int> track_video_;
    std::vector<std::vector<int>> video_hands_;
    std::vector<int> same_video_candidates_;
    std::vector<std::pair<HandRef, HandRef>> adjacent_;
};

}  // namespace handtrack
