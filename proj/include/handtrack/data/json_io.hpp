#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "handtrack/data/types.hpp"
#include "handtrack/data/validate.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

namespace detail {

inline std::string hand_location(const std::string& clip, std::int64_t frame, std::size_t hand) {
    return "clip '" + clip + "', frame " + std::to_string(frame) + ", hand " + std::to_string(hand);
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + ": missing field '" + key + "'");
    return *it;
}

inline double number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + ": expected a number");
    return v.get<double>();
}

inline std::int64_t integer(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer()) throw SchemaError(where + ": expected an integer");
    return v.get<std::int64_t>();
}

inline std::string string(const nlohmann::json& v, const std::string& where) {
    if (!v.is_string()) throw SchemaError(where + ": expected a string");
    return v.get<std::string>();
}

inline HandInstance hand_from_json(const nlohmann::json& j, const std::string& where) {
    HandInstance h;
    h.track_id = string(require(j, "track_id", where), where + " track_id");
    const auto side = string(require(j, "hand_side", where), where + " hand_side");
    if (side == "left")
        h.hand_side = HandSide::Left;
    else if (side == "right")
        h.hand_side = HandSide::Right;
    else
        throw SchemaError(where + ": unknown hand_side '" + side + "'");
    h.score = number(require(j, "score", where), where + " score");

    const auto& bb = require(j, "bbox", where);
    if (!bb.is_array() || bb.size() != 4) throw SchemaError(where + ": bbox must be [x,y,w,h]");
    h.bbox = {number(bb[0], where), number(bb[1], where), number(bb[2], where), number(bb[3], where)};

    const auto& kps = require(j, "keypoints", where);
    if (!kps.is_array() || kps.size() % 3 != 0 || kps.size() / 3 != kNumJoints)
        throw SchemaError(where + ": expected 21 keypoints, got " +
                          (kps.is_array() ? std::to_string(kps.size() / 3) : std::string("none")));
    for (int k = 0; k < kNumJoints; ++k) {
        auto& kp = h.keypoints[k];
        kp.x = number(kps[3 * k], where);
        kp.y = number(kps[3 * k + 1], where);
        const auto& v = kps[3 * k + 2];
        if (!v.is_number()) throw SchemaError(where + ": visibility must be numeric");
        const double code = v.get<double>();
        if (code == 0.0)
            kp.vis = Visibility::NotAvailable;
        else if (code == 1.0)
            kp.vis = Visibility::Occluded;
        else if (code == 2.0)
            kp.vis = Visibility::Visible;
        else
            throw SchemaError(where + ": unknown visibility code " + v.dump() + " at joint " + std::to_string(k));
    }

    if (auto it = j.find("keypoint_scores"); it != j.end()) {
        if (!it->is_array() || it->size() != kNumJoints)
            throw SchemaError(where + ": keypoint_scores must hold 21 numbers");
        std::array<double, kNumJoints> s{};
        for (int k = 0; k < kNumJoints; ++k) s[k] = number((*it)[k], where);
        h.keypoint_scores = s;
    }
    if (auto it = j.find("matched_prior"); it != j.end()) {
        h.has_matched_prior_field = true;
        if (!it->is_null()) h.matched_prior = string(*it, where + " matched_prior");
    }
    return h;
}

inline nlohmann::json hand_to_json(const HandInstance& h) {
    nlohmann::json j;
    j["track_id"] = h.track_id;
    j["hand_side"] = std::string(to_string(h.hand_side));
    j["score"] = h.score;
    j["bbox"] = {h.bbox.x, h.bbox.y, h.bbox.w, h.bbox.h};
    auto kps = nlohmann::json::array();
    for (const auto& kp : h.keypoints) {
        kps.push_back(kp.x);
        kps.push_back(kp.y);
        kps.push_back(static_cast<int>(kp.vis));
    }
    j["keypoints"] = std::move(kps);
    if (h.keypoint_scores) j["keypoint_scores"] = *h.keypoint_scores;
    if (h.has_matched_prior_field)
        j["matched_prior"] = h.matched_prior ? nlohmann::json(*h.matched_prior) : nlohmann::json(nullptr);
    return j;
}

inline std::string line_context(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Structural parse only; type invariants are left to validate_dataset.
inline Dataset dataset_from_json(const nlohmann::json& root) {
    Dataset ds;
    const auto& clips = detail::require(root, "clips", "root");
    if (!clips.is_array()) throw SchemaError("root: 'clips' must be an array");
    for (std::size_t c = 0; c < clips.size(); ++c) {
        const auto& jc = clips[c];
        std::string where = "clip #" + std::to_string(c);
        ClipAnnotation clip;
        clip.clip_id = detail::string(detail::require(jc, "clip_id", where), where + " clip_id");
        where = "clip '" + clip.clip_id + "'";
        clip.video_id = detail::string(detail::require(jc, "video_id", where), where + " video_id");
        clip.fps = detail::number(detail::require(jc, "fps", where), where + " fps");
        const auto& frames = detail::require(jc, "frames", where);
        if (!frames.is_array()) throw SchemaError(where + ": 'frames' must be an array");
        for (const auto& jf : frames) {
            FrameAnnotation fr;
            fr.frame_id = detail::integer(detail::require(jf, "frame_id", where), where + " frame_id");
            const std::string fwhere = where + ", frame " + std::to_string(fr.frame_id);
            fr.width = static_cast<int>(detail::integer(detail::require(jf, "width", fwhere), fwhere + " width"));
            fr.height = static_cast<int>(detail::integer(detail::require(jf, "height", fwhere), fwhere + " height"));
            const auto& hands = detail::require(jf, "hands", fwhere);
            if (!hands.is_array()) throw SchemaError(fwhere + ": 'hands' must be an array");
            for (std::size_t h = 0; h < hands.size(); ++h)
                fr.hands.push_back(detail::hand_from_json(hands[h], detail::hand_location(clip.clip_id, fr.frame_id, h)));
            clip.frames.push_back(std::move(fr));
        }
        ds.clips.push_back(std::move(clip));
    }
    return ds;
}

inline nlohmann::json dataset_to_json(const Dataset& ds) {
    auto clips = nlohmann::json::array();
    for (const auto& clip : ds.clips) {
        nlohmann::json jc;
        jc["clip_id"] = clip.clip_id;
        jc["video_id"] = clip.video_id;
        jc["fps"] = clip.fps;
        auto frames = nlohmann::json::array();
        for (const auto& fr : clip.frames) {
            nlohmann::json jf;
            jf["frame_id"] = fr.frame_id;
            jf["width"] = fr.width;
            jf["height"] = fr.height;
            auto hands = nlohmann::json::array();
            for (const auto& h : fr.hands) hands.push_back(detail::hand_to_json(h));
            jf["hands"] = std::move(hands);
            frames.push_back(std::move(jf));
        }
        jc["frames"] = std::move(frames);
        clips.push_back(std::move(jc));
    }
    return nlohmann::json{{"clips", std::move(clips)}};
}

inline std::string serialize_dataset(const Dataset& ds) { return dataset_to_json(ds).dump() + "\n"; }

/// Parses text without checking type invariants. Throws SchemaError.
inline Dataset parse_dataset_text_unchecked(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("malformed JSON at " + detail::line_context(text, e.byte ? e.byte - 1 : 0) + ": " + e.what());
    }
    return dataset_from_json(root);
}

/// Parses and enforces every dataset invariant; the first violation is
/// reported as a SchemaError.
inline Dataset parse_dataset_text(const std::string& text) {
    Dataset ds = parse_dataset_text_unchecked(text);
    if (auto report = validate_dataset(ds); !report.empty()) throw SchemaError(report.front().to_string());
    return ds;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

inline Dataset parse_dataset(const std::filesystem::path& path) { return parse_dataset_text(read_text_file(path)); }

inline Dataset parse_dataset_unchecked(const std::filesystem::path& path) {
    return parse_dataset_text_unchecked(read_text_file(path));
}

inline void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
    write_text_file(path, serialize_dataset(ds));
}

}  // namespace handtrack
