#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "handtrack/condpose/prior.hpp"
#include "handtrack/error.hpp"
#include "handtrack/tracking/gcn.hpp"
#include "handtrack/tracking/similarity.hpp"

namespace handtrack {

enum class Strategy { Iou, L2, Gcn, GcnVisual };

inline Strategy parse_strategy(const std::string& s) {
    if (s == "iou") return Strategy::Iou;
    if (s == "l2") return Strategy::L2;
    if (s == "gcn") return Strategy::Gcn;
    if (s == "gcn-visual") return Strategy::GcnVisual;
    throw ConfigError("unknown matching strategy '" + s + "' (expected iou, l2, gcn or gcn-visual)");
}

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Iou: return "iou";
        case Strategy::L2: return "l2";
        case Strategy::Gcn: return "gcn";
        case Strategy::GcnVisual: return "gcn-visual";
    }
    return "?";
}

inline bool needs_embedding(Strategy s) { return s == Strategy::Gcn || s == Strategy::GcnVisual; }

/// A hand to be matched, with its embedding when the strategy uses one.
struct MatchCandidate {
    HandInstance hand;
    std::optional<Embedding> embedding;
};

struct Track {
    std::uint64_t id = 0;
    HandInstance last;
    std::optional<Embedding> embedding;
    std::int64_t last_seen = 0;
    int misses = 0;
    std::vector<PriorRecord> priors;  // sorted by frame

    std::string id_string() const { return std::to_string(id); }

    /// Appends a prior and drops records select_prior can no longer return
    /// for any frame after `frame`.
    void push_prior(PriorRecord r, int delta) {
        priors.push_back(std::move(r));
        const std::int64_t horizon = priors.back().frame_id + 1 - delta;
        std::size_t keep_from = 0;
        for (std::size_t i = 0; i < priors.size(); ++i)
            if (priors[i].frame_id < horizon) keep_from = i;
        priors.erase(priors.begin(), priors.begin() + static_cast<std::ptrdiff_t>(keep_from));
    }
};

struct TrackerConfig {
    Strategy strategy = Strategy::Iou;
    double min_sim = 0.3;
    int max_age = 1;
};

struct TrackerState {
    std::map<std::uint64_t, Track> tracks;  // active tracks by id
    std::uint64_t next_id = 1;
    std::optional<std::int64_t> last_frame;
};

inline double similarity(const Track& t, const MatchCandidate& d, Strategy s) {
    switch (s) {
        case Strategy::Iou: return iou(t.last.bbox, d.hand.bbox);
        case Strategy::L2: return distance_to_similarity(pose_l2(t.last, d.hand));
        case Strategy::Gcn:
        case Strategy::GcnVisual:
            if (!t.embedding || !d.embedding) throw std::invalid_argument("similarity: embedding strategy without embeddings");
            return distance_to_similarity((*t.embedding - *d.embedding).norm());
    }
    throw std::invalid_argument("similarity: unknown strategy");
}

/// Rows follow the state's track order (ascending id), columns the detections.
inline Eigen::MatrixXd similarity_matrix(const TrackerState& state, const std::vector<MatchCandidate>& dets,
                                         Strategy strategy) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(state.tracks.size()), static_cast<Eigen::Index>(dets.size()));
    Eigen::Index i = 0;
    for (const auto& [id, track] : state.tracks) {
        for (std::size_t j = 0; j < dets.size(); ++j) m(i, static_cast<Eigen::Index>(j)) = similarity(track, dets[j], strategy);
        ++i;
    }
    return m;
}

namespace tracker_detail {

// Content order of detections, so results do not depend on input order.
inline std::vector<std::size_t> canonical_order(const std::vector<MatchCandidate>& dets) {
    std::vector<std::size_t> idx(dets.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto key = [&](std::size_t i) {
        const auto& h = dets[i].hand;
        return std::tie(h.bbox.x, h.bbox.y, h.bbox.w, h.bbox.h, h.score);
    };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (key(a) != key(b)) return key(a) < key(b);
        const auto& ka = dets[a].hand.keypoints;
        const auto& kb = dets[b].hand.keypoints;
        for (int j = 0; j < kNumJoints; ++j) {
            if (ka[j].x != kb[j].x) return ka[j].x < kb[j].x;
            if (ka[j].y != kb[j].y) return ka[j].y < kb[j].y;
        }
        return false;
    });
    return idx;
}

}  // namespace tracker_detail

struct StepResult {
    std::vector<std::string> det_track_ids;  // per detection
    std::vector<bool> is_new;
};

/// Greedy matching: repeatedly take the most similar free (track, detection)
/// pair with similarity >= min_sim, ties to the lower track id and then the
/// detection earlier in content order. Unmatched detections open tracks;
/// tracks missing max_age consecutive frames are retired.
inline StepResult track_step(TrackerState& state, std::int64_t frame_id, const std::vector<MatchCandidate>& dets,
                             const Eigen::MatrixXd& sim, const TrackerConfig& cfg) {
    if (sim.rows() != static_cast<Eigen::Index>(state.tracks.size()) || sim.cols() != static_cast<Eigen::Index>(dets.size()))
        throw std::invalid_argument("track_step: similarity matrix shape does not match tracks x detections");
    if (state.last_frame && frame_id <= *state.last_frame) throw DataError("track_step: frame ids must increase");
    if (cfg.max_age < 1) throw ConfigError("max_age must be >= 1");
    state.last_frame = frame_id;

    const auto order = tracker_detail::canonical_order(dets);
    std::vector<std::size_t> rank(dets.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

    std::vector<Track*> rows;
    for (auto& [id, t] : state.tracks) rows.push_back(&t);

    struct Cand {
        double s;
        std::size_t row, det;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < dets.size(); ++j) {
            const double s = sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (s >= cfg.min_sim) cands.push_back({s, i, j});
        }
    std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
        if (a.s != b.s) return a.s > b.s;
        if (a.row != b.row) return a.row < b.row;  // rows are in ascending id order
        return rank[a.det] < rank[b.det];
    });

    StepResult res;
    res.det_track_ids.assign(dets.size(), {});
    res.is_new.assign(dets.size(), false);
    std::vector<bool> row_used(rows.size(), false), det_used(dets.size(), false);
    for (const auto& c : cands) {
        if (row_used[c.row] || det_used[c.det]) continue;
        row_used[c.row] = det_used[c.det] = true;
        Track& t = *rows[c.row];
        t.last = dets[c.det].hand;
        t.embedding = dets[c.det].embedding;
        t.last_seen = frame_id;
        t.misses = 0;
        res.det_track_ids[c.det] = t.id_string();
    }

    std::vector<std::uint64_t> retired;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!row_used[i] && ++rows[i]->misses >= cfg.max_age) retired.push_back(rows[i]->id);
    for (auto id : retired) state.tracks.erase(id);

    for (std::size_t j : order) {
        if (det_used[j]) continue;
        Track t;
        t.id = state.next_id++;
        t.last = dets[j].hand;
        t.embedding = dets[j].embedding;
        t.last_seen = frame_id;
        res.det_track_ids[j] = t.id_string();
        res.is_new[j] = true;
        state.tracks.emplace(t.id, std::move(t));
    }
    return res;
}

}  // namespace handtrack
