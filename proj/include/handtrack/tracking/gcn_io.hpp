#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "handtrack/data/json_io.hpp"
#include "handtrack/error.hpp"
#include "handtrack/tracking/gcn.hpp"

namespace handtrack {

inline constexpr int kGcnFormatVersion = 1;

namespace gcn_io_detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw DataError(std::string("GCN weights: '") + name + "' must have " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw DataError(std::string("GCN weights: '") + name + "' must have " + std::to_string(cols) + " columns");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index n, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        throw DataError(std::string("GCN weights: '") + name + "' must have " + std::to_string(n) + " entries");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

}  // namespace gcn_io_detail

/// JSON form of the GCN weights. The adjacency is not stored; it is rebuilt
/// from the fixed skeleton on load.
inline nlohmann::json gcn_weights_to_json(const GcnWeights& w) {
    using namespace gcn_io_detail;
    return {{"format", "handtrack-gcn"}, {"version", kGcnFormatVersion}, {"channels", w.channels},
            {"w1", matrix_to_json(w.w1)},  {"b1", vector_to_json(w.b1)},    {"w2", matrix_to_json(w.w2)},
            {"b2", vector_to_json(w.b2)},  {"f1", matrix_to_json(w.f1)},    {"c1", vector_to_json(w.c1)},
            {"f2", matrix_to_json(w.f2)},  {"c2", vector_to_json(w.c2)}};
}

inline GcnWeights gcn_weights_from_json(const nlohmann::json& j) {
    using namespace gcn_io_detail;
    try {
        if (j.value("format", std::string()) != "handtrack-gcn") throw DataError("GCN weights: missing format tag");
        if (j.value("version", -1) != kGcnFormatVersion)
            throw DataError("GCN weights: unsupported version " + j.value("version", nlohmann::json(nullptr)).dump());
        const int c = j.at("channels").get<int>();
        if (c != 2 && c != 3) throw DataError("GCN weights: channels must be 2 or 3");
        GcnWeights w = GcnWeights::zeros(c);
        w.w1 = matrix_from_json(j.at("w1"), c, kGcnHidden, "w1");
        w.b1 = vector_from_json(j.at("b1"), kGcnHidden, "b1");
        w.w2 = matrix_from_json(j.at("w2"), kGcnHidden, kEmbedDim, "w2");
        w.b2 = vector_from_json(j.at("b2"), kEmbedDim, "b2");
        w.f1 = matrix_from_json(j.at("f1"), kEmbedDim, kVisualDim + kEmbedDim, "f1");
        w.c1 = vector_from_json(j.at("c1"), kEmbedDim, "c1");
        w.f2 = matrix_from_json(j.at("f2"), kEmbedDim, kEmbedDim, "f2");
        w.c2 = vector_from_json(j.at("c2"), kEmbedDim, "c2");
        return w;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("GCN weights: ") + e.what());
    }
}

inline void write_gcn_weights(const std::filesystem::path& path, const GcnWeights& w) {
    write_text_file(path, gcn_weights_to_json(w).dump() + "\n");
}

inline GcnWeights read_gcn_weights(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("GCN weights '" + path.string() + "' are not valid JSON: " + e.what());
    }
    return gcn_weights_from_json(j);
}

}  // namespace handtrack
