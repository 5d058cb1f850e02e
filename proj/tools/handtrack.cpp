// handtrack: multi-hand pose tracking and evaluation from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "handtrack/cli/config.hpp"
#include "handtrack/cli/manifest.hpp"
#include "handtrack/cli/parallel.hpp"
#include "handtrack/cli/pipeline.hpp"
#include "handtrack/condpose/weights_io.hpp"
#include "handtrack/data/folds.hpp"
#include "handtrack/data/json_io.hpp"
#include "handtrack/data/synthetic.hpp"
#include "handtrack/data/validate.hpp"
#include "handtrack/tracking/gcn_fit.hpp"
#include "handtrack/tracking/gcn_io.hpp"

namespace fs = std::filesystem;
using namespace handtrack;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kData = 3 };

// RunConfig flags shared by track, eval and sweep. --config-from loads a
// manifest instead and cannot be mixed with explicit flags.
struct ConfigFlags {
    RunConfig cfg;
    double min_conf = -1.0;
    std::string manifest;
    std::vector<CLI::Option*> opts;

    void add(CLI::App* app, bool tracking) {
        if (tracking) {
            opts.push_back(app->add_option("--strategy", cfg.strategy, "iou, l2, gcn or gcn-visual")->capture_default_str());
            opts.push_back(app->add_option("--min-sim", cfg.min_sim, "minimum match similarity")->capture_default_str());
            opts.push_back(app->add_option("--delta", cfg.delta, "prior look-back in frames")->capture_default_str());
            opts.push_back(app->add_option("--peak-threshold", cfg.peak_threshold, "minimum prior average peak")->capture_default_str());
            opts.push_back(app->add_option("--sigma-hm", cfg.sigma_hm, "stub heatmap sigma (heatmap px)")->capture_default_str());
            opts.push_back(app->add_option("--crop-scale", cfg.crop_scale, "crop side / bbox size")->capture_default_str());
            opts.push_back(app->add_option("--in-res", cfg.in_res)->capture_default_str());
            opts.push_back(app->add_option("--out-res", cfg.out_res)->capture_default_str());
            opts.push_back(app->add_option("--max-age", cfg.max_age, "frames a track may go unmatched")->capture_default_str());
            opts.push_back(app->add_option("--seed", cfg.seed)->capture_default_str());
            opts.push_back(app->add_flag("--clamp-outputs", cfg.clamp_outputs, "clamp conditional heatmaps to [0,1]"));
            opts.push_back(app->add_flag("--literal-contrastive", cfg.literal_contrastive,
                                         "use the literal printed contrastive form"));
        }
        opts.push_back(app->add_option("--thr-ratio", cfg.thr_ratio, "PCK radius ratio of bbox size")->capture_default_str());
        opts.push_back(app->add_option("--thr-sigma", cfg.thr_sigma, "PCK normalized-distance cutoff")->capture_default_str());
        opts.push_back(app->add_option("--occluded-counts", cfg.occluded_counts, "score occluded ground-truth joints")
                           ->capture_default_str());
        opts.push_back(app->add_option("--min-joint-confidence", min_conf, "ignore predicted joints below this score"));
        app->add_option("--config-from", manifest, "take the RunConfig from a manifest.json");
    }

    RunConfig resolve() {
        if (!manifest.empty()) {
            for (auto* o : opts)
                if (o->count() > 0) throw ConfigError("--config-from cannot be combined with " + o->get_name());
            return config_from_manifest(manifest);
        }
        if (min_conf >= 0.0) cfg.min_joint_confidence = min_conf;
        cfg.validate();
        return cfg;
    }
};

struct ModelFlags {
    std::string weights;
    bool zero = false;
    bool copy = false;
    std::string gcn;

    void add(CLI::App* app) {
        app->add_option("--weights", weights, "conditional branch weights (CPWT)");
        app->add_flag("--zero-weights", zero, "all-zero branch weights");
        app->add_flag("--copy-weights", copy, "weights that pass the base heatmap through unchanged");
        app->add_option("--gcn-weights", gcn, "GCN weights JSON (gcn strategies)");
    }

    TrackModels load() const {
        const int chosen = !weights.empty() + zero + copy;
        if (chosen != 1) throw ConfigError("give exactly one of --weights, --zero-weights, --copy-weights");
        TrackModels m;
        m.cond = !weights.empty() ? read_weights(weights) : zero ? zero_weights() : copy_weights();
        if (!gcn.empty()) m.gcn = read_gcn_weights(gcn);
        return m;
    }

    void inputs(std::vector<ManifestInput>& in) const {
        if (!weights.empty()) in.push_back({"weights", weights});
        if (!gcn.empty()) in.push_back({"gcn_weights", gcn});
    }

    nlohmann::json describe() const { return {{"weights", zero ? "zero" : copy ? "copy" : "file"}}; }
};

struct SourceFlags {
    std::string cphm;
    bool stub = false;

    void add(CLI::App* app) {
        app->add_option("--cphm", cphm, "directory of <clip_id>.cphm exchange files");
        app->add_flag("--stub-predictor", stub, "render base heatmaps from detection keypoints");
    }

    HeatmapSource make(const RunConfig& cfg) const {
        if (cphm.empty() == !stub) throw ConfigError("give exactly one of --cphm or --stub-predictor");
        return stub ? stub_source(cfg) : cphm_source(cphm, cfg);
    }

    void inputs(std::vector<ManifestInput>& in) const {
        if (!cphm.empty()) in.push_back({"cphm", cphm});
    }
};

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<double> split_numbers(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const auto& t : split(s)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw ConfigError(std::string("bad number '") + t + "' in " + what);
        }
    }
    return out;
}

void print_stats(const Dataset& ds) {
    const auto s = dataset_stats(ds);
    std::printf("clips          %zu\n", s.clips);
    std::printf("videos         %zu\n", s.videos);
    std::printf("frames         %zu\n", s.frames);
    std::printf("annotations    %zu\n", s.annotations);
    std::printf("tracks         %zu\n", s.tracks);
    std::printf("hands/frame    mean %.3f  median %zu  max %zu\n", s.mean_hands_per_frame, s.median_hands_per_frame,
                s.max_hands_per_frame);
}

void print_summary(const std::string& csv) { std::fputs(csv.c_str(), stdout); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporally conditioned multi-hand pose tracking and evaluation"};
    app.require_subcommand(1);
    std::optional<int> jobs_flag;
    int jobs = 1;

    // validate
    auto* validate = app.add_subcommand("validate", "check an annotation or tracks file");
    std::string validate_path;
    validate->add_option("file", validate_path)->required();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic ground truth + detections pair");
    SynthSpec spec;
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--clips", spec.n_clips)->capture_default_str();
    synth->add_option("--videos", spec.n_videos)->capture_default_str();
    synth->add_option("--frames", spec.n_frames)->capture_default_str();
    synth->add_option("--hands", spec.n_hands)->capture_default_str();
    synth->add_option("--width", spec.width)->capture_default_str();
    synth->add_option("--height", spec.height)->capture_default_str();
    synth->add_option("--hand-size", spec.hand_size)->capture_default_str();
    synth->add_option("--motion", spec.motion_amplitude, "max per-frame keypoint motion, px")->capture_default_str();
    synth->add_option("--occlusion", spec.occlusion_rate, "detection drop probability")->capture_default_str();
    synth->add_option("--noise", spec.detector_noise, "detection jitter sigma, px")->capture_default_str();
    synth->add_option("--occluded-joints", spec.occluded_joint_rate)->capture_default_str();
    synth->add_option("--fps", spec.fps)->capture_default_str();
    synth->add_option("--seed", spec.seed)->capture_default_str();

    // track
    auto* track = app.add_subcommand("track", "run conditional pose estimation and tracking");
    std::string track_dets, track_out;
    ConfigFlags track_cfg;
    ModelFlags track_models;
    SourceFlags track_source;
    track->add_option("--detections", track_dets, "detections JSON")->required();
    track->add_option("--out", track_out, "output directory")->required();
    track_cfg.add(track, true);
    track_models.add(track);
    track_source.add(track);
    track->add_option("--jobs", jobs_flag, "worker threads (default $HANDTRACK_JOBS or 1)");

    // eval
    auto* eval = app.add_subcommand("eval", "score tracks against ground truth per fold");
    std::string eval_gt, eval_tracks, eval_out;
    ConfigFlags eval_cfg;
    eval->add_option("--gt", eval_gt, "ground-truth JSON")->required();
    eval->add_option("--tracks", eval_tracks, "tracks JSON")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval_cfg.add(eval, false);
    eval->add_option("--jobs", jobs_flag, "worker threads (default $HANDTRACK_JOBS or 1)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "grid search over strategy x min_sim x peak_threshold");
    std::string sweep_gt, sweep_dets, sweep_out, sweep_strategies = "iou", sweep_min_sims = "0.3",
                                                 sweep_peaks = "0.20,0.25";
    ConfigFlags sweep_cfg;
    ModelFlags sweep_models;
    SourceFlags sweep_source;
    sweep->add_option("--gt", sweep_gt)->required();
    sweep->add_option("--detections", sweep_dets)->required();
    sweep->add_option("--out", sweep_out)->required();
    sweep->add_option("--strategies", sweep_strategies, "comma-separated")->capture_default_str();
    sweep->add_option("--min-sims", sweep_min_sims, "comma-separated")->capture_default_str();
    sweep->add_option("--peak-thresholds", sweep_peaks, "comma-separated")->capture_default_str();
    sweep_cfg.add(sweep, true);
    sweep_models.add(sweep);
    sweep_source.add(sweep);
    sweep->add_option("--jobs", jobs_flag, "worker threads (default $HANDTRACK_JOBS or 1)");

    // report
    auto* report = app.add_subcommand("report", "print dataset statistics or an evaluation summary");
    std::string report_dataset, report_eval;
    auto* rd = report->add_option("--dataset", report_dataset, "annotation JSON");
    auto* re = report->add_option("--eval", report_eval, "eval output directory");
    rd->excludes(re);

    // fit-gcn
    auto* fit = app.add_subcommand("fit-gcn", "fit GCN pose-embedding weights on ground-truth tracks");
    std::string fit_data, fit_out;
    GcnFitConfig fit_cfg;
    int fit_channels = 2;
    fit->add_option("--dataset", fit_data)->required();
    fit->add_option("--out", fit_out, "weights JSON path")->required();
    fit->add_option("--epochs", fit_cfg.epochs)->capture_default_str();
    fit->add_option("--pairs-per-epoch", fit_cfg.pairs_per_epoch)->capture_default_str();
    fit->add_option("--batch-size", fit_cfg.batch_size)->capture_default_str();
    fit->add_option("--lr", fit_cfg.learning_rate)->capture_default_str();
    fit->add_option("--margin", fit_cfg.margin)->capture_default_str();
    fit->add_option("--channels", fit_channels, "2, or 3 with an annotation flag")->capture_default_str();
    fit->add_option("--seed", fit_cfg.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        jobs = jobs_flag ? *jobs_flag : default_jobs();
        if (jobs < 1) throw ConfigError("--jobs must be >= 1");

        if (*validate) {
            const Dataset ds = parse_dataset_unchecked(validate_path);
            const auto rep = validate_dataset(ds);
            for (const auto& v : rep) std::cout << v.to_string() << "\n";
            if (!rep.empty()) return kData;
            std::cout << "ok: " << ds.clips.size() << " clips\n";
        } else if (*synth) {
            const auto data = generate_synthetic_dataset(spec);
            fs::create_directories(synth_out);
            write_dataset(fs::path(synth_out) / "gt.json", data.gt);
            write_dataset(fs::path(synth_out) / "detections.json", data.detections);
            nlohmann::json params = {{"clips", spec.n_clips},          {"videos", spec.n_videos},
                                     {"frames", spec.n_frames},        {"hands", spec.n_hands},
                                     {"width", spec.width},            {"height", spec.height},
                                     {"hand_size", spec.hand_size},    {"motion", spec.motion_amplitude},
                                     {"occlusion", spec.occlusion_rate}, {"noise", spec.detector_noise},
                                     {"occluded_joints", spec.occluded_joint_rate}, {"fps", spec.fps},
                                     {"seed", spec.seed}};
            write_manifest(synth_out, make_manifest("synth", RunConfig{}, {}, params));
        } else if (*track) {
            const RunConfig cfg = track_cfg.resolve();
            const TrackModels models = track_models.load();
            const auto source = track_source.make(cfg);
            const Dataset dets = parse_dataset(track_dets);
            const Dataset tracks = run_track(dets, source, models, cfg, jobs);
            fs::create_directories(track_out);
            write_dataset(fs::path(track_out) / "tracks.json", tracks);
            std::vector<ManifestInput> ins{{"detections", track_dets}};
            track_source.inputs(ins);
            track_models.inputs(ins);
            auto params = track_models.describe();
            params["predictor"] = track_source.stub ? "stub" : "cphm";
            write_manifest(track_out, make_manifest("track", cfg, ins, params));
        } else if (*eval) {
            const RunConfig cfg = eval_cfg.resolve();
            const Dataset gt = parse_dataset(eval_gt);
            const Dataset pred = parse_dataset(eval_tracks);
            const EvalResult res = run_eval(gt, pred, cfg.eval(), jobs);
            write_eval_outputs(eval_out, res);
            write_manifest(eval_out, make_manifest("eval", cfg, {{"gt", eval_gt}, {"tracks", eval_tracks}}));
            print_summary(summary_csv(res));
        } else if (*sweep) {
            const RunConfig cfg = sweep_cfg.resolve();
            const TrackModels models = sweep_models.load();
            const auto source = sweep_source.make(cfg);
            const SweepGrid grid{split(sweep_strategies), split_numbers(sweep_min_sims, "--min-sims"),
                                 split_numbers(sweep_peaks, "--peak-thresholds")};
            const Dataset gt = parse_dataset(sweep_gt);
            const Dataset dets = parse_dataset(sweep_dets);
            const auto board = run_sweep(gt, dets, source, models, cfg, grid, jobs);
            fs::create_directories(sweep_out);
            const std::string csv = leaderboard_csv(board);
            write_text_file(fs::path(sweep_out) / "leaderboard.csv", csv);
            std::vector<ManifestInput> ins{{"gt", sweep_gt}, {"detections", sweep_dets}};
            sweep_source.inputs(ins);
            sweep_models.inputs(ins);
            auto params = sweep_models.describe();
            params["predictor"] = sweep_source.stub ? "stub" : "cphm";
            params["grid"] = {{"strategies", grid.strategies},
                              {"min_sims", grid.min_sims},
                              {"peak_thresholds", grid.peak_thresholds}};
            write_manifest(sweep_out, make_manifest("sweep", cfg, ins, params));
            print_summary(csv);
        } else if (*report) {
            if (!report_dataset.empty()) {
                print_stats(parse_dataset(report_dataset));
            } else if (!report_eval.empty()) {
                print_summary(read_text_file(fs::path(report_eval) / "summary.csv"));
            } else {
                throw ConfigError("report needs --dataset or --eval");
            }
        } else if (*fit) {
            if (fit_channels != 2 && fit_channels != 3) throw ConfigError("--channels must be 2 or 3");
            if (fit_cfg.epochs < 1 || fit_cfg.pairs_per_epoch < 1 || fit_cfg.batch_size < 1 || !(fit_cfg.margin > 0.0))
                throw ConfigError("fit-gcn: epochs, pairs, batch size and margin must be positive");
            const Dataset ds = parse_dataset(fit_data);
            const auto res = fit_gcn(ds, GcnWeights::random(fit_cfg.seed, fit_channels), fit_cfg);
            write_gcn_weights(fit_out, res.weights);
            std::printf("final loss %.6f  pair accuracy %.4f\n", res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back(),
                        res.accuracy);
        }
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kConfig;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
