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
 * Record files: one JSON object per line (UTF-8), plus an optional sibling
 * manifest "<path>.manifest.json".
 *
 *   geometry    {"kind": "chain"|"grid", "L": int, "probes": [int, int],
 *                "theta": float, "phi": float}   sites 0-based, row-major
 *   m           string of '0'/'1', one char per non-probe site in
 *               increasing site order; '0' is outcome +1, '1' is -1
 *   va, vb      probe basis index 0, 1, 2 (1, exp(i pi/4 X), exp(i pi/4 Y))
 *   ma, mb      probe outcome bits
 *   discarded   bool
 *   seed        uint64, key of the RNG stream that produced the repeat
 *   born_prob   float, optional
 *
 * Any other key is carried through unchanged.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mie/cluster_sim.hpp"
#include "mie/core.hpp"
#include "mie/rng.hpp"

namespace mie {

inline constexpr const char* kRecordFormat = "mie-records/1";

inline nlohmann::json geometry_to_json(const GeometryConfig& g) {
    return {{"kind", to_string(g.kind)}, {"L", g.L}, {"probes", {g.probes[0], g.probes[1]}},
            {"theta", g.theta},          {"phi", g.phi}};
}

inline GeometryConfig geometry_from_json(const nlohmann::json& j) {
    GeometryConfig g;
    try {
        g.kind = lattice_from_string(j.at("kind").get<std::string>());
        g.L = j.at("L").get<int>();
        const auto p = j.at("probes");
        g.probes = {p.at(0).get<int>(), p.at(1).get<int>()};
        g.theta = j.value("theta", 0.0);
        g.phi = j.value("phi", kDefaultPhi);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed geometry: ") + e.what());
    } catch (const ContractViolation& e) {
        throw DataError(std::string("malformed geometry: ") + e.what());
    }
    try {
        g.validate();
    } catch (const ContractViolation& e) {
        throw DataError(std::string("invalid geometry: ") + e.what());
    }
    return g;
}

inline nlohmann::json noise_to_json(const NoiseConfig& n) {
    return {{"meas_flip_p", n.meas_flip_p}, {"probe_depol_q", n.probe_depol_q}, {"detection", n.detection}};
}

inline NoiseConfig noise_from_json(const nlohmann::json& j) {
    NoiseConfig n;
    n.meas_flip_p = j.value("meas_flip_p", 0.0);
    n.probe_depol_q = j.value("probe_depol_q", 0.0);
    n.detection = j.value("detection", true);
    return n;
}

inline std::string bits_to_string(std::span<const std::uint8_t> m) {
    std::string s(m.size(), '0');
    for (std::size_t i = 0; i < m.size(); ++i) s[i] = m[i] ? '1' : '0';
    return s;
}

inline Bits bits_from_string(const std::string& s) {
    Bits out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw DataError("outcome string may contain only '0' and '1'");
        out[i] = static_cast<std::uint8_t>(s[i] - '0');
    }
    return out;
}

inline nlohmann::json record_to_json(const OutcomeRecord& r) {
    nlohmann::json j = r.extra.is_object() ? r.extra : nlohmann::json::object();
    j["geometry"] = geometry_to_json(r.geometry);
    j["m"] = bits_to_string(r.m);
    j["va"] = basis_index(r.va);
    j["vb"] = basis_index(r.vb);
    j["ma"] = r.ma;
    j["mb"] = r.mb;
    j["discarded"] = r.discarded;
    j["seed"] = r.seed;
    if (r.born_prob) j["born_prob"] = *r.born_prob;
    return j;
}

inline OutcomeRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("record is not a JSON object");
    OutcomeRecord r;
    try {
        r.geometry = geometry_from_json(j.at("geometry"));
        r.m = bits_from_string(j.at("m").get<std::string>());
        r.va = basis_from_index(j.at("va").get<int>());
        r.vb = basis_from_index(j.at("vb").get<int>());
        const int ma = j.at("ma").get<int>(), mb = j.at("mb").get<int>();
        if ((ma != 0 && ma != 1) || (mb != 0 && mb != 1)) throw DataError("probe outcomes must be 0 or 1");
        r.ma = static_cast<std::uint8_t>(ma);
        r.mb = static_cast<std::uint8_t>(mb);
        r.discarded = j.at("discarded").get<bool>();
        r.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("born_prob") && !j["born_prob"].is_null()) r.born_prob = j["born_prob"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed record: ") + e.what());
    } catch (const ContractViolation& e) {
        throw DataError(std::string("malformed record: ") + e.what());
    }
    if (static_cast<int>(r.m.size()) != r.geometry.num_measured())
        throw DataError("outcome string length does not match the record geometry");
    for (const auto& [key, value] : j.items())
        if (key != "geometry" && key != "m" && key != "va" && key != "vb" && key != "ma" && key != "mb" &&
            key != "discarded" && key != "seed" && key != "born_prob")
            r.extra[key] = value;
    return r;
}

inline std::string manifest_path(const std::string& path) { return path + ".manifest.json"; }

struct DatasetManifest {
    std::string format_version = kRecordFormat;
    std::uint64_t master_seed = 0;
    GeometryConfig geometry;
    NoiseConfig noise;
    std::size_t record_count = 0;
    std::size_t discard_count = 0;
    nlohmann::json creation = nlohmann::json::object(); // echo of generating parameters

    nlohmann::json to_json() const {
        return {{"format_version", format_version}, {"master_seed", master_seed},
                {"geometry", geometry_to_json(geometry)}, {"noise", noise_to_json(noise)},
                {"record_count", record_count}, {"discard_count", discard_count},
                {"creation", creation}};
    }

    static DatasetManifest from_json(const nlohmann::json& j) {
        DatasetManifest m;
        try {
            m.format_version = j.at("format_version").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw DataError("manifest has no format_version");
        }
        if (m.format_version != kRecordFormat)
            throw DataError("unsupported record format '" + m.format_version + "' (this build reads " +
                            kRecordFormat + ")");
        try {
            m.master_seed = j.at("master_seed").get<std::uint64_t>();
            m.geometry = geometry_from_json(j.at("geometry"));
            m.noise = noise_from_json(j.value("noise", nlohmann::json::object()));
            m.record_count = j.at("record_count").get<std::size_t>();
            m.discard_count = j.value("discard_count", std::size_t{0});
            m.creation = j.value("creation", nlohmann::json::object());
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("malformed manifest: ") + e.what());
        }
        return m;
    }
};

inline void write_records(const std::string& path, std::span<const OutcomeRecord> records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    if (!out) throw DataError("write to '" + path + "' failed");
}

inline void write_manifest(const std::string& path, const DatasetManifest& manifest) {
    std::ofstream out(manifest_path(path), std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open manifest for '" + path + "' for writing");
    out << manifest.to_json().dump(2) << '\n';
}

inline std::optional<DatasetManifest> read_manifest(const std::string& path) {
    const std::string mp = manifest_path(path);
    if (!std::filesystem::exists(mp)) return std::nullopt;
    std::ifstream in(mp, std::ios::binary);
    if (!in) throw DataError("cannot read manifest '" + mp + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest '" + mp + "' is not valid JSON: " + e.what());
    }
    return DatasetManifest::from_json(j);
}

// Reads a record file, checking it against its manifest when one exists.
// Blank lines are skipped; line numbers in errors are 1-based.
inline std::vector<OutcomeRecord> read_records(const std::string& path) {
    const auto manifest = read_manifest(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    std::vector<OutcomeRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (manifest && manifest->record_count != out.size())
        throw DataError("'" + path + "' has " + std::to_string(out.size()) + " records but its manifest lists " +
                        std::to_string(manifest->record_count));
    return out;
}

struct Splits {
    std::vector<OutcomeRecord> train, validation, test;
};

/*!
 * Seeded permutation, then contiguous pieces. The first two sizes are
 * rounded to nearest and the test split takes the rest.
 */
inline Splits split(std::span<const OutcomeRecord> records, std::array<double, 3> fractions, std::uint64_t seed) {
    for (double f : fractions) require(f >= 0.0 && f <= 1.0, "split fractions must lie in [0, 1]");
    require(std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) <= 1e-9, "split fractions must sum to 1");
    const std::size_t n = records.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto rng = CounterRng::for_stream(seed, 0x5B117);
    shuffle(order.begin(), order.end(), rng);
    const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n))));
    const auto n_val =
        std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n))));
    Splits s;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = i < n_train ? s.train : (i < n_train + n_val ? s.validation : s.test);
        dst.push_back(records[order[i]]);
    }
    return s;
}

} // namespace mie
