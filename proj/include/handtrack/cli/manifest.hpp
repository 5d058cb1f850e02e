#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "handtrack/cli/config.hpp"
#include "handtrack/data/json_io.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

inline std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

inline std::string sha256_file(const std::filesystem::path& p) { return sha256_hex(read_text_file(p)); }

/// Hashes every regular file under a directory in path order.
inline std::string sha256_tree(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += std::filesystem::relative(f, dir).generic_string() + ":" + sha256_file(f) + "\n";
    return sha256_hex(acc);
}

struct ManifestInput {
    std::string role;
    std::filesystem::path path;
};

/// Manifest: command, full RunConfig, extra parameters and input hashes.
/// No timestamps or host data, so reruns produce identical manifests.
inline nlohmann::json make_manifest(const std::string& command, const RunConfig& cfg,
                                    const std::vector<ManifestInput>& inputs, nlohmann::json extra = nlohmann::json::object()) {
    auto ins = nlohmann::json::array();
    for (const auto& in : inputs) {
        const bool dir = std::filesystem::is_directory(in.path);
        ins.push_back({{"role", in.role},
                       {"name", in.path.filename().string()},
                       {"sha256", dir ? sha256_tree(in.path) : sha256_file(in.path)}});
    }
    return {{"command", command}, {"config", to_json(cfg)}, {"parameters", std::move(extra)}, {"inputs", std::move(ins)}};
}

inline void write_manifest(const std::filesystem::path& dir, const nlohmann::json& manifest) {
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline RunConfig config_from_manifest(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("config")) throw ConfigError("manifest '" + path.string() + "' has no config section");
    return run_config_from_json(j["config"]);
}

}  // namespace handtrack
