#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "handtrack/cli/config.hpp"
#include "handtrack/cli/parallel.hpp"
#include "handtrack/condpose/branches.hpp"
#include "handtrack/condpose/prior.hpp"
#include "handtrack/data/folds.hpp"
#include "handtrack/data/json_io.hpp"
#include "handtrack/data/types.hpp"
#include "handtrack/error.hpp"
#include "handtrack/heatmap/cphm.hpp"
#include "handtrack/heatmap/heatmap.hpp"
#include "handtrack/metrics/mot.hpp"
#include "handtrack/metrics/report.hpp"
#include "handtrack/tracking/gcn.hpp"
#include "handtrack/tracking/tracker.hpp"

namespace handtrack {

/// Per-detection base heatmap and features for one clip.
using ClipHeatmaps = std::function<DetectionInput(const FrameAnnotation&, std::size_t det, const CropWindow&)>;
/// Prepares a clip's provider (e.g. loads its exchange file).
using HeatmapSource = std::function<ClipHeatmaps(const ClipAnnotation&)>;

namespace pipeline_detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace pipeline_detail

/// Stand-in base network: Gaussian heatmaps rendered at the detection's own
/// keypoints and seeded random features.
inline HeatmapSource stub_source(const RunConfig& cfg) {
    const double sigma = cfg.sigma_hm;
    const std::uint64_t seed = cfg.seed;
    return [sigma, seed](const ClipAnnotation& clip) -> ClipHeatmaps {
        const std::uint64_t clip_seed = pipeline_detail::mix(seed ^ pipeline_detail::fnv1a(clip.clip_id));
        return [sigma, clip_seed](const FrameAnnotation& f, std::size_t det, const CropWindow& win) {
            DetectionInput in{render_gt_heatmap(f.hands[det], win, sigma).first,
                              Tensor3(kFeatureChannels, win.out_res, win.out_res)};
            std::mt19937_64 rng(pipeline_detail::mix(clip_seed ^ pipeline_detail::mix(static_cast<std::uint64_t>(f.frame_id)) ^
                                                     pipeline_detail::mix(det + 0x51ed270b27ull)));
            std::normal_distribution<float> n(0.0f, 1.0f);
            for (std::size_t i = 0; i < in.features.size(); ++i) in.features.data()[i] = n(rng);
            return in;
        };
    };
}

/// Reads `<dir>/<clip_id>.cphm` for each clip.
inline HeatmapSource cphm_source(const std::filesystem::path& dir, const RunConfig& cfg) {
    const int out_res = cfg.out_res;
    return [dir, out_res](const ClipAnnotation& clip) -> ClipHeatmaps {
        const auto path = dir / (clip.clip_id + ".cphm");
        auto file = std::make_shared<CphmFile>(read_cphm(path));
        const std::string name = path.string();
        return [file, name, out_res](const FrameAnnotation& f, std::size_t det, const CropWindow& win) {
            if (f.frame_id < 0 || f.frame_id > 0xffffffffll)
                throw DataError(name + ": frame " + std::to_string(f.frame_id) + " cannot be addressed");
            auto it = file->find({static_cast<std::uint32_t>(f.frame_id), static_cast<std::uint32_t>(det)});
            if (it == file->end())
                throw DataError(name + ": no record for frame " + std::to_string(f.frame_id) + " detection " +
                                std::to_string(det));
            const auto& rec = it->second;
            if (rec.heatmap.channels() != kNumJoints || rec.heatmap.height() != out_res || rec.heatmap.width() != out_res)
                throw DataError(name + ": frame " + std::to_string(f.frame_id) + " detection " + std::to_string(det) +
                                " heatmap is not " + std::to_string(kNumJoints) + "x" + std::to_string(out_res) + "x" +
                                std::to_string(out_res));
            return DetectionInput{Heatmap{rec.heatmap, win}, rec.features};
        };
    };
}

struct TrackModels {
    CondWeights cond = zero_weights();
    std::optional<GcnWeights> gcn;
};

/// Decodes a conditional heatmap into a hand. Joints whose channel is empty
/// are reported as not available.
inline HandInstance decode_hand(const HandInstance& det, const Heatmap& h, const FrameAnnotation& frame) {
    HandInstance out;
    out.hand_side = det.hand_side;
    out.bbox = det.bbox;
    out.score = det.score;
    std::array<double, kNumJoints> scores{};
    const PeakSet peaks = extract_peaks(h);
    for (int j = 0; j < kNumJoints; ++j) {
        const auto& p = peaks[j];
        scores[j] = p.confidence;
        auto& kp = out.keypoints[j];
        kp.x = std::clamp(p.pos.x, 0.0, static_cast<double>(frame.width) - 1.0);
        kp.y = std::clamp(p.pos.y, 0.0, static_cast<double>(frame.height) - 1.0);
        kp.vis = p.confidence > 0.0 ? Visibility::Visible : Visibility::NotAvailable;
        if (kp.vis == Visibility::NotAvailable) kp.x = kp.y = 0.0;
    }
    out.keypoint_scores = scores;
    return out;
}

/// Tracks one clip: conditional pose per detection, then matching.
inline ClipAnnotation track_clip(const ClipAnnotation& clip, const ClipHeatmaps& heatmaps, const TrackModels& models,
                                 const RunConfig& cfg) {
    const Strategy strategy = parse_strategy(cfg.strategy);
    if (needs_embedding(strategy) && !models.gcn)
        throw ConfigError("strategy '" + cfg.strategy + "' needs GCN weights");
    const CondConfig cond = cfg.cond();
    const TrackerConfig tcfg = cfg.tracker();

    ClipAnnotation out{clip.clip_id, clip.video_id, clip.fps, {}};
    TrackerState state;
    for (const auto& frame : clip.frames) {
        std::vector<DetectionInput> inputs;
        for (std::size_t d = 0; d < frame.hands.size(); ++d)
            inputs.push_back(heatmaps(frame, d, crop_window(frame.hands[d].bbox, cfg.crop_scale, cfg.in_res, cfg.out_res)));

        std::vector<PriorRecord> priors;
        for (const auto& [id, track] : state.tracks)
            if (const auto* p = select_prior(track.priors, frame.frame_id, cond)) priors.push_back(*p);
        const auto cond_out = predict_frame(inputs, priors, models.cond, cond);

        std::vector<MatchCandidate> cands;
        for (std::size_t d = 0; d < frame.hands.size(); ++d) {
            MatchCandidate c{decode_hand(frame.hands[d], cond_out[d].heatmap, frame), std::nullopt};
            if (needs_embedding(strategy)) {
                const Embedding pose = gcn_embed(pose_feature(c.hand, models.gcn->channels), *models.gcn);
                c.embedding = strategy == Strategy::Gcn ? pose : joint_visual_embed(inputs[d].features, pose, *models.gcn);
            }
            cands.push_back(std::move(c));
        }
        const auto sim = similarity_matrix(state, cands, strategy);
        const StepResult step = track_step(state, frame.frame_id, cands, sim, tcfg);

        FrameAnnotation of{frame.frame_id, frame.width, frame.height, {}};
        for (std::size_t d = 0; d < cands.size(); ++d) {
            HandInstance h = cands[d].hand;
            h.track_id = step.det_track_ids[d];
            h.matched_prior = cond_out[d].prior_track_id;
            h.has_matched_prior_field = true;
            of.hands.push_back(std::move(h));
            auto& track = state.tracks.at(std::stoull(step.det_track_ids[d]));
            track.push_prior(PriorRecord::from_heatmap(track.id_string(), frame.frame_id, cond_out[d].heatmap), cond.delta);
        }
        out.frames.push_back(std::move(of));
    }
    return out;
}

inline Dataset run_track(const Dataset& detections, const HeatmapSource& source, const TrackModels& models,
                         const RunConfig& cfg, int jobs) {
    cfg.validate();
    if (needs_embedding(parse_strategy(cfg.strategy)) && !models.gcn)
        throw ConfigError("strategy '" + cfg.strategy + "' needs GCN weights");
    Dataset out;
    out.clips.resize(detections.clips.size());
    parallel_for(detections.clips.size(), jobs, [&](std::size_t i) {
        const auto& clip = detections.clips[i];
        out.clips[i] = track_clip(clip, source(clip), models, cfg);
    });
    return out;
}

struct FoldReport {
    Fold fold;
    EvalReport report;
};

struct EvalResult {
    std::vector<FoldReport> folds;
    EvalReport average;
};

/// Every predicted clip must exist in the ground truth and vice versa.
inline void check_clip_alignment(const Dataset& gt, const Dataset& pred) {
    std::set<std::string> g, p;
    for (const auto& c : gt.clips) g.insert(c.clip_id);
    for (const auto& c : pred.clips) p.insert(c.clip_id);
    for (const auto& id : p)
        if (!g.count(id)) throw DataError("predicted clip '" + id + "' has no ground truth");
    for (const auto& id : g)
        if (!p.count(id)) throw DataError("ground-truth clip '" + id + "' has no predictions");
}

/// Leave-one-video-out evaluation: each fold scores the clips of its held-out
/// video; the average is the unweighted mean over folds.
inline EvalResult run_eval(const Dataset& gt, const Dataset& pred, const EvalOptions& opt, int jobs) {
    check_clip_alignment(gt, pred);
    const auto folds = make_folds(gt);
    std::vector<MotEvents> per_clip(gt.clips.size());
    parallel_for(gt.clips.size(), jobs, [&](std::size_t i) {
        per_clip[i] = evaluate_clip(gt.clips[i], pred.find_clip(gt.clips[i].clip_id), opt);
    });
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < gt.clips.size(); ++i) index[gt.clips[i].clip_id] = i;

    EvalResult res;
    std::vector<EvalReport> reports;
    for (const auto& f : folds) {
        MotEvents ev;
        for (const auto& id : f.val_clip_ids) ev.merge(per_clip[index.at(id)]);
        res.folds.push_back({f, finalize(ev, "fold_" + std::to_string(f.fold_id))});
        reports.push_back(res.folds.back().report);
    }
    res.average = cross_fold_report(reports);
    return res;
}

inline std::string summary_csv(const EvalResult& r) {
    std::ostringstream os;
    os << "fold,video_id,map,mota,motp,precision,recall,f1,fn,fp,idsw\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    auto line = [&](const std::string& fold, const std::string& video, const EvalRow& t) {
        os << fold << ',' << video << ',' << opt(t.ap) << ',' << opt(t.mota) << ',' << opt(t.motp) << ','
           << opt(t.precision) << ',' << opt(t.recall) << ',' << opt(t.f1) << ',' << format_number(t.fn) << ','
           << format_number(t.fp) << ',' << format_number(t.idsw) << "\n";
    };
    for (const auto& f : r.folds) line(f.report.name, f.fold.video_id, f.report.total());
    line("average", "", r.average.total());
    return os.str();
}

inline void write_eval_outputs(const std::filesystem::path& dir, const EvalResult& r) {
    std::filesystem::create_directories(dir);
    for (const auto& f : r.folds) {
        auto j = report_to_json(f.report);
        j["video_id"] = f.fold.video_id;
        j["degenerate"] = f.fold.degenerate;
        write_text_file(dir / (f.report.name + ".json"), j.dump(2) + "\n");
        write_text_file(dir / (f.report.name + ".csv"), report_to_csv(f.report));
    }
    write_text_file(dir / "average.json", report_to_json(r.average).dump(2) + "\n");
    write_text_file(dir / "average.csv", report_to_csv(r.average));
    write_text_file(dir / "summary.csv", summary_csv(r));
}

struct SweepGrid {
    std::vector<std::string> strategies;
    std::vector<double> min_sims;
    std::vector<double> peak_thresholds;
};

struct SweepEntry {
    RunConfig config;
    EvalRow total;
};

/// Runs track + eval for every grid cell and ranks by MOTA, then mAP
/// (both descending); remaining ties keep grid order.
inline std::vector<SweepEntry> run_sweep(const Dataset& gt, const Dataset& detections, const HeatmapSource& source,
                                         const TrackModels& models, const RunConfig& base, const SweepGrid& grid, int jobs) {
    if (grid.strategies.empty() || grid.min_sims.empty() || grid.peak_thresholds.empty())
        throw ConfigError("sweep grid has an empty axis");
    std::vector<RunConfig> cells;
    for (const auto& s : grid.strategies)
        for (double m : grid.min_sims)
            for (double p : grid.peak_thresholds) {
                RunConfig c = base;
                c.strategy = s;
                c.min_sim = m;
                c.peak_threshold = p;
                c.validate();
                if (needs_embedding(parse_strategy(s)) && !models.gcn)
                    throw ConfigError("strategy '" + s + "' needs GCN weights");
                cells.push_back(c);
            }
    std::vector<SweepEntry> out;
    for (const auto& c : cells) {
        const Dataset tracks = run_track(detections, source, models, c, jobs);
        out.push_back({c, run_eval(gt, tracks, c.eval(), jobs).average.total()});
    }
    auto key = [](const std::optional<double>& v) { return v ? *v : -std::numeric_limits<double>::infinity(); };
    std::stable_sort(out.begin(), out.end(), [&](const SweepEntry& a, const SweepEntry& b) {
        if (key(a.total.mota) != key(b.total.mota)) return key(a.total.mota) > key(b.total.mota);
        return key(a.total.ap) > key(b.total.ap);
    });
    return out;
}

inline std::string leaderboard_csv(const std::vector<SweepEntry>& rows) {
    std::ostringstream os;
    os << "rank,strategy,min_sim,peak_threshold,map,mota,motp,precision,recall,f1,idsw\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    int rank = 1;
    for (const auto& r : rows)
        os << rank++ << ',' << r.config.strategy << ',' << format_number(r.config.min_sim) << ','
           << format_number(r.config.peak_threshold) << ',' << opt(r.total.ap) << ',' << opt(r.total.mota) << ','
           << opt(r.total.motp) << ',' << opt(r.total.precision) << ',' << opt(r.total.recall) << ','
           << opt(r.total.f1) << ',' << format_number(r.total.idsw) << "\n";
    return os.str();
}

}  // namespace handtrack
