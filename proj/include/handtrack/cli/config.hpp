#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "handtrack/condpose/prior.hpp"
#include "handtrack/error.hpp"
#include "handtrack/heatmap/heatmap.hpp"
#include "handtrack/metrics/pck.hpp"
#include "handtrack/tracking/tracker.hpp"

namespace handtrack {

/// Every knob that influences track/eval outputs. Serialized verbatim into
/// each output manifest.
struct RunConfig {
    std::string strategy = "iou";
    double min_sim = 0.3;
    int delta = 3;
    double peak_threshold = 0.20;
    double thr_ratio = 0.2;
    double thr_sigma = 0.5;
    double sigma_hm = kDefaultHeatmapSigma;
    double crop_scale = kDefaultCropScale;
    int in_res = kDefaultInRes;
    int out_res = kDefaultOutRes;
    int max_age = 1;
    std::uint64_t seed = 0;
    bool occluded_counts = true;
    bool literal_contrastive = false;
    bool clamp_outputs = false;
    std::optional<double> min_joint_confidence;

    void validate() const {
        parse_strategy(strategy);
        auto fail = [](const std::string& m) { throw ConfigError(m); };
        if (!(min_sim >= 0.0 && min_sim <= 1.0)) fail("min_sim must lie in [0, 1]");
        if (delta < 1) fail("delta must be >= 1");
        if (!(peak_threshold >= 0.0 && peak_threshold <= 1.0)) fail("peak_threshold must lie in [0, 1]");
        if (!(thr_ratio > 0.0) || !(thr_sigma > 0.0)) fail("PCK ratio and sigma must be positive");
        if (!(sigma_hm > 0.0)) fail("sigma_hm must be positive");
        if (!(crop_scale > 0.0)) fail("crop_scale must be positive");
        if (in_res <= 0) fail("in_res must be positive");
        if (out_res <= 0 || out_res % 2 != 0) fail("out_res must be a positive even number");
        if (max_age < 1) fail("max_age must be >= 1");
        if (min_joint_confidence && !(*min_joint_confidence >= 0.0 && *min_joint_confidence <= 1.0))
            fail("min_joint_confidence must lie in [0, 1]");
    }

    CondConfig cond() const { return {delta, peak_threshold, clamp_outputs}; }
    TrackerConfig tracker() const { return {parse_strategy(strategy), min_sim, max_age}; }
    EvalOptions eval() const { return {{thr_ratio, thr_sigma}, occluded_counts, min_joint_confidence}; }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j = {{"strategy", c.strategy},
                        {"min_sim", c.min_sim},
                        {"delta", c.delta},
                        {"peak_threshold", c.peak_threshold},
                        {"thr_ratio", c.thr_ratio},
                        {"thr_sigma", c.thr_sigma},
                        {"sigma_hm", c.sigma_hm},
                        {"crop_scale", c.crop_scale},
                        {"in_res", c.in_res},
                        {"out_res", c.out_res},
                        {"max_age", c.max_age},
                        {"seed", c.seed},
                        {"occluded_counts", c.occluded_counts},
                        {"literal_contrastive", c.literal_contrastive},
                        {"clamp_outputs", c.clamp_outputs}};
    j["min_joint_confidence"] = c.min_joint_confidence ? nlohmann::json(*c.min_joint_confidence) : nlohmann::json(nullptr);
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        c.strategy = j.value("strategy", c.strategy);
        c.min_sim = j.value("min_sim", c.min_sim);
        c.delta = j.value("delta", c.delta);
        c.peak_threshold = j.value("peak_threshold", c.peak_threshold);
        c.thr_ratio = j.value("thr_ratio", c.thr_ratio);
        c.thr_sigma = j.value("thr_sigma", c.thr_sigma);
        c.sigma_hm = j.value("sigma_hm", c.sigma_hm);
        c.crop_scale = j.value("crop_scale", c.crop_scale);
        c.in_res = j.value("in_res", c.in_res);
        c.out_res = j.value("out_res", c.out_res);
        c.max_age = j.value("max_age", c.max_age);
        c.seed = j.value("seed", c.seed);
        c.occluded_counts = j.value("occluded_counts", c.occluded_counts);
        c.literal_contrastive = j.value("literal_contrastive", c.literal_contrastive);
        c.clamp_outputs = j.value("clamp_outputs", c.clamp_outputs);
        if (auto it = j.find("min_joint_confidence"); it != j.end() && !it->is_null())
            c.min_joint_confidence = it->get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad run config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace handtrack
