#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <utility>

#include "handtrack/binary_io.hpp"
#include "handtrack/error.hpp"
#include "handtrack/tensor.hpp"

namespace handtrack {

inline constexpr std::uint32_t kCphmVersion = 1;
inline constexpr int kFeatureChannels = 64;

/// One detection's base-network output: raw heatmap and conv_1 features.
struct CphmRecord {
    std::uint32_t frame_id = 0;
    std::uint32_t det_index = 0;
    Tensor3 heatmap;   // J x H x W
    Tensor3 features;  // 64 x H x W
};

using CphmKey = std::pair<std::uint32_t, std::uint32_t>;  // (frame_id, det_index)
using CphmFile = std::map<CphmKey, CphmRecord>;

inline void write_cphm(std::ostream& os, const CphmFile& file) {
    binio::put_magic(os, "CPHM");
    binio::put_u32(os, kCphmVersion);
    for (const auto& [key, rec] : file) {
        if (rec.features.channels() != kFeatureChannels)
            throw DataError("CPHM: feature tensor must have 64 channels");
        if (rec.features.height() != rec.heatmap.height() || rec.features.width() != rec.heatmap.width())
            throw DataError("CPHM: feature and heatmap rasters differ");
        binio::put_u32(os, key.first);
        binio::put_u32(os, key.second);
        binio::put_u32(os, static_cast<std::uint32_t>(rec.heatmap.channels()));
        binio::put_u32(os, static_cast<std::uint32_t>(rec.heatmap.height()));
        binio::put_u32(os, static_cast<std::uint32_t>(rec.heatmap.width()));
        binio::put_f32s(os, rec.heatmap.data());
        binio::put_u32(os, kFeatureChannels);
        binio::put_f32s(os, rec.features.data());
    }
}

inline CphmFile read_cphm(std::istream& is) {
    binio::Reader rd(is, "CPHM");
    rd.expect_magic("CPHM");
    if (const auto v = rd.u32(); v != kCphmVersion)
        throw DataError("CPHM: unsupported version " + std::to_string(v));
    CphmFile out;
    while (!rd.at_eof()) {
        CphmRecord rec;
        rec.frame_id = rd.u32();
        rec.det_index = rd.u32();
        const auto j = rd.u32(), h = rd.u32(), w = rd.u32();
        if (j == 0 || h == 0 || w == 0 || j > 4096 || h > 4096 || w > 4096)
            throw DataError("CPHM: implausible heatmap shape in record (" + std::to_string(rec.frame_id) + ", " +
                            std::to_string(rec.det_index) + ")");
        rec.heatmap = Tensor3(static_cast<int>(j), static_cast<int>(h), static_cast<int>(w));
        rd.f32s(rec.heatmap.data());
        if (const auto c = rd.u32(); c != kFeatureChannels)
            throw DataError("CPHM: feature channel count must be 64, got " + std::to_string(c));
        rec.features = Tensor3(kFeatureChannels, static_cast<int>(h), static_cast<int>(w));
        rd.f32s(rec.features.data());
        const CphmKey key{rec.frame_id, rec.det_index};
        if (!out.emplace(key, std::move(rec)).second)
            throw DataError("CPHM: duplicate record for frame " + std::to_string(key.first) + ", detection " +
                            std::to_string(key.second));
    }
    return out;
}

inline CphmFile read_cphm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_cphm(in);
}

inline void write_cphm(const std::filesystem::path& path, const CphmFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_cphm(out, file);
}

}  // namespace handtrack
