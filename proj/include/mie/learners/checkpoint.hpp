// Copyright 2026 The mie Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/*
 * Checkpoint layout:
 *
 *   8 bytes    magic "MIECKPT1"
 *   4 bytes    header length H, uint32 little-endian
 *   H bytes    UTF-8 JSON header:
 *                format            "mie-checkpoint/1"
 *                kind              "born" | "attention"
 *                geometry          as in record files
 *                hyperparameters   model-specific object
 *                tensors           [{name, shape, complex, offset, count}]
 *                                  offset and count in doubles
 *                total_doubles     int
 *   8 * total  parameters, IEEE-754 binary64 little-endian. Complex
 *              tensors store (re, im) pairs.
 */

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mie/dataio.hpp"
#include "mie/learners/attention.hpp"
#include "mie/learners/born_machine.hpp"

namespace mie::learn {

inline constexpr char kCheckpointMagic[8] = {'M', 'I', 'E', 'C', 'K', 'P', 'T', '1'};
inline constexpr const char* kCheckpointFormat = "mie-checkpoint/1";

namespace detail {

inline std::uint64_t to_le(std::uint64_t x) {
    if constexpr (std::endian::native == std::endian::little) return x;
    else return __builtin_bswap64(x);
}

inline std::uint32_t to_le32(std::uint32_t x) {
    if constexpr (std::endian::native == std::endian::little) return x;
    else return __builtin_bswap32(x);
}

} // namespace detail

inline std::unique_ptr<LearnedModel> make_model(const std::string& kind, const GeometryConfig& g,
                                                const nlohmann::json& hp) {
    if (kind == "born") {
        require(g.kind == Lattice::Chain, "the Born machine supports chain geometries only");
        BornConfig c;
        c.L = g.L;
        c.chi = hp.value("chi", c.chi);
        c.init_noise = hp.value("init_noise", c.init_noise);
        c.seed = hp.value("seed", c.seed);
        return std::make_unique<BornMachine>(c);
    }
    if (kind == "attention") {
        AttentionConfig c;
        c.geometry = g;
        c.layers = hp.value("layers", c.layers);
        c.heads = hp.value("heads", c.heads);
        c.tok_width = hp.value("tok_width", c.tok_width);
        c.pos_width = hp.value("pos_width", c.pos_width);
        c.msk_width = hp.value("msk_width", c.msk_width);
        c.ff_width = hp.value("ff_width", c.ff_width);
        c.head_init = hp.value("head_init", c.head_init);
        c.sublattice_init = hp.value("sublattice_init", c.sublattice_init);
        c.seed = hp.value("seed", c.seed);
        return std::make_unique<AttentionModel>(c);
    }
    throw ContractViolation("unknown learned model kind '" + kind + "' (expected born or attention)");
}

inline nlohmann::json checkpoint_header(const LearnedModel& model) {
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& t : model.params().tensors())
        tensors.push_back(
            {{"name", t.name}, {"shape", t.shape}, {"complex", t.complex}, {"offset", t.offset}, {"count", t.doubles()}});
    return {{"format", kCheckpointFormat},
            {"kind", model.kind()},
            {"geometry", geometry_to_json(model.geometry())},
            {"hyperparameters", model.hyperparameters()},
            {"tensors", tensors},
            {"total_doubles", model.params().size()}};
}

inline void write_checkpoint(const std::string& path, const LearnedModel& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    const std::string header = checkpoint_header(model).dump();
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    const std::uint32_t len = detail::to_le32(static_cast<std::uint32_t>(header.size()));
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (double x : model.params().data()) {
        const std::uint64_t w = detail::to_le(std::bit_cast<std::uint64_t>(x));
        out.write(reinterpret_cast<const char*>(&w), sizeof w);
    }
    if (!out) throw DataError("write to '" + path + "' failed");
}

inline std::unique_ptr<LearnedModel> read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw DataError("'" + path + "' is not a checkpoint file (bad magic)");
    std::uint32_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&len), sizeof len)) throw DataError("checkpoint truncated in header");
    len = detail::to_le32(len);
    std::string header(len, '\0');
    if (!in.read(header.data(), len)) throw DataError("checkpoint truncated in header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    if (h.value("format", "") != kCheckpointFormat)
        throw DataError("unsupported checkpoint format '" + h.value("format", "") + "'");
    std::unique_ptr<LearnedModel> model;
    try {
        model = make_model(h.at("kind").get<std::string>(), geometry_from_json(h.at("geometry")),
                           h.at("hyperparameters"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint header: ") + e.what());
    } catch (const ContractViolation& e) {
        throw DataError(std::string("malformed checkpoint header: ") + e.what());
    }
    const nlohmann::json expect = checkpoint_header(*model).at("tensors");
    if (h.at("tensors") != expect) throw DataError("checkpoint tensor table does not match its hyperparameters");
    auto& data = model->params().data();
    for (double& x : data) {
        std::uint64_t w = 0;
        if (!in.read(reinterpret_cast<char*>(&w), sizeof w)) throw DataError("checkpoint truncated in parameters");
        x = std::bit_cast<double>(detail::to_le(w));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint has trailing bytes");
    return model;
}

} // namespace mie::learn
