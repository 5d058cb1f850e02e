#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "handtrack/binary_io.hpp"
#include "handtrack/condpose/branches.hpp"
#include "handtrack/error.hpp"

namespace handtrack {

inline constexpr std::uint32_t kCpwtVersion = 1;

// Layout: "CPWT", u32 version, u16 branch count, then per branch a u32
// length-prefixed name ("att" | "fus"), u32 layer count, and per layer
// u8 kind, u32 out_ch, in_ch, kh, kw, stride, pad, f32 kernel, f32 bias.

inline void write_weights(std::ostream& os, const CondWeights& w) {
    binio::put_magic(os, "CPWT");
    binio::put_u32(os, kCpwtVersion);
    binio::put_u16(os, 2);
    for (const BranchWeights* b : {&w.attention, &w.fusion}) {
        const std::string name = branch_name(b->kind);
        binio::put_u32(os, static_cast<std::uint32_t>(name.size()));
        binio::put_magic(os, name);
        binio::put_u32(os, static_cast<std::uint32_t>(b->layers.size()));
        for (const auto& l : b->layers) {
            binio::put_u8(os, static_cast<std::uint8_t>(l.kind));
            for (int v : {l.out_ch, l.in_ch, l.kh, l.kw, l.stride, l.pad}) binio::put_u32(os, static_cast<std::uint32_t>(v));
            binio::put_f32s(os, l.kernel);
            binio::put_f32s(os, l.bias);
        }
    }
}

/// Reads both branches and checks them against the branch layout for the
/// joint count implied by the fusion branch's final layer.
inline CondWeights read_weights(std::istream& is) {
    binio::Reader rd(is, "CPWT");
    rd.expect_magic("CPWT");
    if (const auto v = rd.u32(); v != kCpwtVersion) throw DataError("CPWT: unsupported version " + std::to_string(v));
    const auto n_branches = rd.u16();
    CondWeights w;
    bool have_att = false, have_fus = false;
    for (std::uint16_t bi = 0; bi < n_branches; ++bi) {
        const auto len = rd.u32();
        if (len > 64) throw DataError("CPWT: branch name too long");
        std::string name(len, '\0');
        rd.bytes(name.data(), len);
        BranchWeights* b = nullptr;
        if (name == "att") {
            b = &w.attention;
            have_att = true;
        } else if (name == "fus") {
            b = &w.fusion;
            have_fus = true;
        } else {
            throw DataError("CPWT: unknown branch '" + name + "'");
        }
        b->layers.clear();
        const auto n_layers = rd.u32();
        if (n_layers > 16) throw DataError("CPWT: implausible layer count");
        for (std::uint32_t li = 0; li < n_layers; ++li) {
            ConvLayer l;
            const auto kind = rd.u8();
            if (kind > 1) throw DataError("CPWT: unknown layer kind " + std::to_string(kind));
            l.kind = static_cast<LayerKind>(kind);
            int* fields[] = {&l.out_ch, &l.in_ch, &l.kh, &l.kw, &l.stride, &l.pad};
            for (int* f : fields) {
                const auto v = rd.u32();
                if (v > 65536) throw DataError("CPWT: implausible layer dimension");
                *f = static_cast<int>(v);
            }
            l.kernel.resize(static_cast<std::size_t>(l.out_ch) * l.in_ch * l.kh * l.kw);
            l.bias.resize(static_cast<std::size_t>(l.out_ch));
            rd.f32s(l.kernel);
            rd.f32s(l.bias);
            b->layers.push_back(std::move(l));
        }
    }
    if (!have_att || !have_fus) throw DataError("CPWT: both 'att' and 'fus' branches are required");
    if (w.fusion.layers.empty()) throw DataError("CPWT: empty fusion branch");
    w.joints = w.fusion.layers.back().out_ch;
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("CPWT: ") + e.what());
    }
    return w;
}

inline void write_weights(const std::filesystem::path& path, const CondWeights& w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_weights(out, w);
}

inline CondWeights read_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_weights(in);
}

}  // namespace handtrack
