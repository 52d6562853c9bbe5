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
 * Training-time access masks for grids: concentric Chebyshev shells around
 * the probes. A site at distance r from its nearest probe is accessible
 * once the shell radius reaches r. Chains are never masked.
 */

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "mie/cluster_sim.hpp"
#include "mie/learners/model.hpp"
#include "mie/rng.hpp"

namespace mie::learn {

// Chebyshev distance from each m position to the nearest probe.
inline std::vector<int> probe_distances(const GeometryConfig& g) {
    require(g.kind == Lattice::Grid, "probe distances are defined for grids");
    std::vector<int> out;
    for (int site : g.measured_sites()) {
        int best = g.L;
        for (int p : g.probes) {
            const int d = std::max(std::abs(site / g.L - p / g.L), std::abs(site % g.L - p % g.L));
            best = std::min(best, d);
        }
        out.push_back(best);
    }
    return out;
}

inline int max_shell_radius(const GeometryConfig& g) {
    const auto d = probe_distances(g);
    return *std::max_element(d.begin(), d.end());
}

inline AccessMask shell_mask(const GeometryConfig& g, int radius) {
    const auto d = probe_distances(g);
    AccessMask out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] <= radius ? 1 : 0;
    return out;
}

// Radius uniform on 1..max; the largest radius exposes every site.
inline AccessMask draw_shell_mask(const GeometryConfig& g, CounterRng& rng) {
    if (g.kind != Lattice::Grid) return {};
    const int rmax = max_shell_radius(g);
    const int radius = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(rmax)));
    return shell_mask(g, radius);
}

} // namespace mie::learn
