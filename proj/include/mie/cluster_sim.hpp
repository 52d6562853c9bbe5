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
 * Cluster-state experiments: sampling repeats of the 1D chain and 2D grid
 * protocols, the exact conditional probe states, and the synthetic noise
 * and error-detection layer.
 *
 * Site numbering is 0-based throughout the code. Chain probes are sites 0
 * and L-1. Grid sites are row-major (site = row * L + col) with row 0 the
 * probe row. The outcome string m lists the non-probe sites in increasing
 * site order.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mie/core.hpp"
#include "mie/parallel.hpp"
#include "mie/qmat.hpp"
#include "mie/rng.hpp"
#include "mie/shadows.hpp"
#include "mie/statevector.hpp"

namespace mie {

enum class Lattice { Chain, Grid };

inline constexpr double kDefaultPhi = 5.0 * std::numbers::pi / 4.0;

inline std::string to_string(Lattice k) { return k == Lattice::Chain ? "chain" : "grid"; }

inline Lattice lattice_from_string(const std::string& s) {
    if (s == "chain") return Lattice::Chain;
    if (s == "grid") return Lattice::Grid;
    throw ContractViolation("unknown geometry kind '" + s + "' (expected chain or grid)");
}

struct GeometryConfig {
    Lattice kind = Lattice::Chain;
    int L = 4;
    std::array<int, 2> probes{0, 3};
    double theta = 0.0;
    double phi = kDefaultPhi;

    static GeometryConfig chain(int L) {
        GeometryConfig g;
        g.kind = Lattice::Chain;
        g.L = L;
        g.probes = {0, L - 1};
        g.validate();
        return g;
    }

    // Probes at (row 0, col 0) and (row 0, col d). d = L-1 puts them on the
    // two corners that share the top edge.
    static GeometryConfig grid(int L, int d, double theta, double phi = kDefaultPhi) {
        GeometryConfig g;
        g.kind = Lattice::Grid;
        g.L = L;
        g.probes = {0, d};
        g.theta = theta;
        g.phi = phi;
        g.validate();
        return g;
    }

    void validate() const {
        if (kind == Lattice::Chain) {
            require(L >= 4 && L % 2 == 0, "chain length L must be even and >= 4");
            require(probes[0] == 0 && probes[1] == L - 1, "chain probes must be the two end sites");
        } else {
            require(L >= 2, "grid size L must be >= 2");
            require(probes[0] >= 0 && probes[0] < probes[1] && probes[1] < L,
                    "grid probes must be two distinct sites of row 0 in increasing order");
        }
    }

    int num_sites() const { return kind == Lattice::Chain ? L : L * L; }
    int num_measured() const { return num_sites() - 2; }
    int separation() const { return probes[1] - probes[0]; }
    bool is_probe(int site) const { return site == probes[0] || site == probes[1]; }

    // Position of `site` in m, or -1 for probes.
    int m_position(int site) const {
        if (is_probe(site)) return -1;
        return site - (site > probes[0] ? 1 : 0) - (site > probes[1] ? 1 : 0);
    }

    std::vector<int> measured_sites() const {
        std::vector<int> out;
        out.reserve(num_measured());
        for (int s = 0; s < num_sites(); ++s)
            if (!is_probe(s)) out.push_back(s);
        return out;
    }

    // Sites protected by error-detection copies, with multiplicity: the two
    // chain probes, or every grid perimeter site (corners twice).
    std::vector<int> protected_copies() const {
        if (kind == Lattice::Chain) return {probes[0], probes[1]};
        std::vector<int> out;
        for (int s = 0; s < num_sites(); ++s) {
            const int r = s / L, c = s % L;
            const int k = (r == 0) + (r == L - 1) + (c == 0) + (c == L - 1);
            for (int i = 0; i < k; ++i) out.push_back(s);
        }
        return out;
    }

    bool operator==(const GeometryConfig&) const = default;
};

struct NoiseConfig {
    double meas_flip_p = 0.0;   // independent readout flip per measured copy
    double probe_depol_q = 0.0; // depolarizing strength on rho_m
    bool detection = true;

    void validate() const {
        require(meas_flip_p >= 0.0 && meas_flip_p <= 1.0, "meas_flip_p must be in [0, 1]");
        require(probe_depol_q >= 0.0 && probe_depol_q <= 1.0, "probe_depol_q must be in [0, 1]");
    }

    bool operator==(const NoiseConfig&) const = default;
};

struct OutcomeRecord {
    GeometryConfig geometry;
    Bits m;
    Basis va = Basis::Identity;
    Basis vb = Basis::Identity;
    std::uint8_t ma = 0;
    std::uint8_t mb = 0;
    bool discarded = false;
    std::uint64_t seed = 0;
    std::optional<double> born_prob;
    nlohmann::json extra = nlohmann::json::object(); // fields this version does not know

    ShadowPair shadow() const { return shadow_from(va, vb, ma, mb); }
    Vec4 observed_ket() const { return product_ket(va, vb, ma, mb); }

    bool operator==(const OutcomeRecord&) const = default;
};

// One repeat: the record plus the probe state the shadows were drawn from.
struct Sample {
    OutcomeRecord record;
    Mat4 rho;
};

inline Mat4 apply_depolarizing(const Mat4& rho, double q) {
    require(q >= 0.0 && q <= 1.0, "depolarizing strength must be in [0, 1]");
    return qmat::depolarize<4>(rho, q);
}

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

// Parities of m over physical sites of each index parity. Position i of m
// is site i + 1 (0-based), i.e. site i + 2 in 1-based numbering; "even"
// refers to the 1-based site index.
inline std::array<int, 2> chain_parities(std::span<const std::uint8_t> m) {
    int even = 0, odd = 0;
    for (std::size_t i = 0; i < m.size(); ++i) ((i % 2 == 0) ? even : odd) ^= m[i];
    return {even, odd};
}

// Index into the Bell table (+,+) -> Phi+, (+,-) -> Phi-, (-,+) -> Psi+,
// (-,-) -> Psi-.
inline int chain_class(std::span<const std::uint8_t> m) {
    const auto [even, odd] = chain_parities(m);
    return 2 * even + odd;
}

inline Vec4 exact_ket_1d(std::span<const std::uint8_t> m) {
    require(m.size() >= 2 && m.size() % 2 == 0, "chain outcome string must have even length >= 2");
    return qmat::bell_state(chain_class(m));
}

inline Mat4 exact_state_1d(std::span<const std::uint8_t> m) { return qmat::pure(exact_ket_1d(m)); }

struct ConditionalKet {
    Vec4 ket;         // normalized probe state, A (x) B
    double born_prob; // probability of the outcome string
};

/*!
 * Brute-force chain oracle: full statevector of the depth-2 preparation
 * circuit, then projection of sites 1..L-2 onto m.
 *
 * The two-qubit gate is U = (H (x) 1) CZ (H (x) H) as a matrix product,
 * which realizes Z_1 -> Z_1 Z_2 and Z_2 -> X_1 X_2. It acts on pairs
 * (2k-1, 2k) and U^dagger on (2k, 2k+1) (1-based).
 */
inline ConditionalKet chain_oracle(int L, std::span<const std::uint8_t> m) {
    require(L >= 4 && L % 2 == 0 && L <= 20, "chain oracle supports even 4 <= L <= 20");
    require(static_cast<int>(m.size()) == L - 2, "outcome string length must be L - 2");
    Mat2 h;
    h << 1.0, 1.0, 1.0, -1.0;
    h /= std::sqrt(2.0);
    StateVector sv;
    for (int s = 0; s < L; ++s) {
        sv.add_plus(s);
        sv.apply_1q(s, h); // |+> -> |0>
    }
    const auto apply_u = [&](int first, int second) {
        sv.apply_1q(first, h);
        sv.apply_1q(second, h);
        sv.apply_cz(first, second);
        sv.apply_1q(first, h);
    };
    const auto apply_u_dag = [&](int first, int second) {
        sv.apply_1q(first, h);
        sv.apply_cz(first, second);
        sv.apply_1q(first, h);
        sv.apply_1q(second, h);
    };
    for (int s = 0; s + 1 < L; s += 2) apply_u(s, s + 1);
    for (int s = 1; s + 1 < L - 1; s += 2) apply_u_dag(s, s + 1);
    double p = 1.0;
    for (int s = 1; s < L - 1; ++s) p *= sv.project_out(s, m[s - 1]);
    // Register now holds [site 0, site L-1] as bits [0, 1].
    const auto& a = sv.amplitudes();
    return {Vec4(a[0], a[2], a[1], a[3]), p};
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

namespace detail {

// exp(i pi/4 Z Z) up to a global phase, realized as Z^{-1/2} Z^{-1/2} CZ.
inline const std::array<cplx, 4>& zz_phase() {
    static const std::array<cplx, 4> p{cplx(1, 0), cplx(0, -1), cplx(0, -1), cplx(1, 0)};
    return p;
}

} // namespace detail

// exp[i (theta/2) Y] exp[i (phi/2) Z].
inline Mat2 measurement_rotation(double theta, double phi) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const cplx e = std::polar(1.0, phi / 2);
    Mat2 r;
    r << c * e, s * std::conj(e), -s * e, c * std::conj(e);
    return r;
}

// Horizontal links of one row in the order (I) odd then (II) even.
inline void apply_row_links(StateVector& sv, int L, int row) {
    for (int parity = 0; parity < 2; ++parity)
        for (int c = parity; c + 1 < L; c += 2) sv.apply_diag_2q(row * L + c, row * L + c + 1, detail::zz_phase());
}

inline void apply_vertical_links(StateVector& sv, int L, int upper_row) {
    for (int c = 0; c < L; ++c) sv.apply_diag_2q(upper_row * L + c, (upper_row + 1) * L + c, detail::zz_phase());
}

/*!
 * Row-sweep evaluation of the grid circuit.
 *
 * Rows are added from the bottom (row L-1) upward and each row is rotated
 * and measured as soon as every gate touching it has been applied, so at
 * most two rows (2L qubits) are stored. Since every entangling gate is
 * diagonal, this schedule produces the same state as applying the full
 * circuit first. Measured qubits are visited row L-1 first, columns
 * ascending; `choose(site, p1)` returns the bit for that site given the
 * conditional probability p1 of reading 1.
 */
template <typename Choose>
ConditionalKet rowsweep(const GeometryConfig& g, Choose&& choose) {
    require(g.kind == Lattice::Grid, "row sweep needs a grid geometry");
    const int L = g.L;
    const Mat2 rot = measurement_rotation(g.theta, g.phi);
    StateVector sv;
    double p = 1.0;
    const auto measure_row = [&](int row) {
        for (int c = 0; c < L; ++c) {
            const int site = row * L + c;
            if (g.is_probe(site)) continue;
            sv.apply_1q(site, rot);
            const double p1 = sv.branch_norm2(site, 1) / sv.norm2();
            const int bit = choose(site, p1);
            const double w = sv.project_out(site, bit);
            if (!(w >= 1e-300)) throw NumericalError("outcome string has vanishing conditional probability");
            p *= w;
        }
    };
    for (int c = 0; c < L; ++c) sv.add_plus((L - 1) * L + c);
    apply_row_links(sv, L, L - 1);
    for (int row = L - 1; row >= 1; --row) {
        for (int c = 0; c < L; ++c) sv.add_plus((row - 1) * L + c);
        apply_row_links(sv, L, row - 1);
        apply_vertical_links(sv, L, row - 1);
        measure_row(row);
    }
    measure_row(0);
    const auto& a = sv.amplitudes();
    // Remaining labels are the probes in increasing site order.
    return {Vec4(a[0], a[2], a[1], a[3]), p};
}

// Conditional probe state for a given outcome string (forced projection).
inline ConditionalKet grid_conditional(const GeometryConfig& g, std::span<const std::uint8_t> m) {
    require(static_cast<int>(m.size()) == g.num_measured(), "outcome string length does not match geometry");
    return rowsweep(g, [&](int site, double) { return static_cast<int>(m[g.m_position(site)]); });
}

/*!
 * Full-statevector grid oracle (L*L <= 16 qubits). Builds the whole
 * circuit, then measures in the same site order as the row sweep, zeroing
 * branches without renormalizing, so the final norm is the Born
 * probability of the outcome string.
 */
template <typename Choose>
ConditionalKet grid_bruteforce(const GeometryConfig& g, Choose&& choose) {
    require(g.kind == Lattice::Grid, "brute-force grid sampler needs a grid geometry");
    require(g.L * g.L <= 16, "brute-force grid sampler supports at most 16 qubits");
    const int L = g.L;
    StateVector sv;
    for (int s = 0; s < L * L; ++s) sv.add_plus(s);
    for (int r = 0; r < L; ++r) apply_row_links(sv, L, r);
    for (int parity = 0; parity < 2; ++parity)
        for (int r = parity; r + 1 < L; r += 2) apply_vertical_links(sv, L, r);
    const Mat2 rot = measurement_rotation(g.theta, g.phi);
    for (int s = 0; s < L * L; ++s)
        if (!g.is_probe(s)) sv.apply_1q(s, rot);
    for (int row = L - 1; row >= 0; --row)
        for (int c = 0; c < L; ++c) {
            const int site = row * L + c;
            if (g.is_probe(site)) continue;
            const double total = sv.norm2();
            const int bit = choose(site, sv.branch_norm2(site, 1) / total);
            sv.zero_other_branch(site, bit);
            if (!(sv.norm2() >= 1e-300)) throw NumericalError("outcome string has vanishing probability");
        }
    const double born = sv.norm2();
    const int pa = sv.position(g.probes[0]);
    const int pb = sv.position(g.probes[1]);
    Vec4 ket = Vec4::Zero();
    const auto& amps = sv.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (amps[i] == cplx(0.0)) continue;
        const int a = static_cast<int>((i >> pa) & 1U);
        const int b = static_cast<int>((i >> pb) & 1U);
        ket[2 * a + b] += amps[i];
    }
    return {ket / std::sqrt(born), born};
}

inline ConditionalKet grid_bruteforce_conditional(const GeometryConfig& g, std::span<const std::uint8_t> m) {
    require(static_cast<int>(m.size()) == g.num_measured(), "outcome string length does not match geometry");
    return grid_bruteforce(g, [&](int site, double) { return static_cast<int>(m[g.m_position(site)]); });
}

// ---------------------------------------------------------------------------
// Noise, probe measurement and detection
// ---------------------------------------------------------------------------

/*!
 * Turns an ideal (m, rho_m) into a reported repeat: depolarize rho_m, draw
 * probe bases and outcomes, flip every reported bit with probability p and
 * compare each protected bit with an independently flipped detection copy.
 * Draw order is fixed: bases, probe outcomes, one flip per bit of m, flips
 * of mA and mB, then one flip per detection copy.
 */
inline Sample finish_repeat(const GeometryConfig& g, const NoiseConfig& noise, const Mat4& rho_ideal, Bits m_true,
                            std::optional<double> born, CounterRng& rng) {
    Sample out;
    out.rho = noise.probe_depol_q > 0.0 ? apply_depolarizing(rho_ideal, noise.probe_depol_q) : rho_ideal;
    OutcomeRecord& rec = out.record;
    rec.geometry = g;
    rec.seed = rng.key();
    rec.born_prob = born;
    rec.va = draw_basis(rng);
    rec.vb = draw_basis(rng);
    const auto [ma, mb] = measure_probes(out.rho, rec.va, rec.vb, rng);

    const double p = noise.meas_flip_p;
    rec.m = m_true;
    for (auto& bit : rec.m) bit ^= static_cast<std::uint8_t>(rng.bernoulli(p));
    rec.ma = static_cast<std::uint8_t>(ma ^ static_cast<int>(rng.bernoulli(p)));
    rec.mb = static_cast<std::uint8_t>(mb ^ static_cast<int>(rng.bernoulli(p)));

    const auto true_bit = [&](int site) {
        if (site == g.probes[0]) return ma;
        if (site == g.probes[1]) return mb;
        return static_cast<int>(m_true[g.m_position(site)]);
    };
    const auto reported_bit = [&](int site) {
        if (site == g.probes[0]) return static_cast<int>(rec.ma);
        if (site == g.probes[1]) return static_cast<int>(rec.mb);
        return static_cast<int>(rec.m[g.m_position(site)]);
    };
    bool mismatch = false;
    for (int site : g.protected_copies()) {
        const int copy = true_bit(site) ^ static_cast<int>(rng.bernoulli(p));
        mismatch = mismatch || (copy != reported_bit(site));
    }
    rec.discarded = noise.detection && mismatch;
    return out;
}

// Non-probe outcomes of the noiseless chain are uniform over all strings.
inline Sample sample_1d(const GeometryConfig& g, const NoiseConfig& noise, CounterRng& rng) {
    require(g.kind == Lattice::Chain, "sample_1d needs a chain geometry");
    Bits m(g.num_measured());
    for (auto& bit : m) bit = static_cast<std::uint8_t>(rng() >> 63);
    const Mat4 rho = exact_state_1d(m);
    return finish_repeat(g, noise, rho, std::move(m), std::nullopt, rng);
}

namespace detail {

template <typename Sweep>
Sample sample_grid(const GeometryConfig& g, const NoiseConfig& noise, CounterRng& rng, bool keep_born,
                   Sweep&& sweep) {
    Bits m(g.num_measured());
    const auto sampled = sweep([&](int site, double p1) {
        const int bit = rng.uniform() < p1 ? 1 : 0;
        m[g.m_position(site)] = static_cast<std::uint8_t>(bit);
        return bit;
    });
    std::optional<double> born;
    if (keep_born) born = sampled.born_prob;
    return finish_repeat(g, noise, qmat::pure(sampled.ket), std::move(m), born, rng);
}

} // namespace detail

inline Sample sample_2d_rowsweep(const GeometryConfig& g, const NoiseConfig& noise, CounterRng& rng) {
    return detail::sample_grid(g, noise, rng, false, [&](auto&& choose) { return rowsweep(g, choose); });
}

inline Sample sample_2d_bruteforce(const GeometryConfig& g, const NoiseConfig& noise, CounterRng& rng) {
    return detail::sample_grid(g, noise, rng, true, [&](auto&& choose) { return grid_bruteforce(g, choose); });
}

enum class Sampler { Auto, RowSweep, BruteForce };

inline Sample sample_repeat(const GeometryConfig& g, const NoiseConfig& noise, CounterRng& rng,
                            Sampler sampler = Sampler::Auto) {
    if (g.kind == Lattice::Chain) return sample_1d(g, noise, rng);
    if (sampler == Sampler::BruteForce) return sample_2d_bruteforce(g, noise, rng);
    return sample_2d_rowsweep(g, noise, rng);
}

// Repeat r draws from stream (master_seed, r); output is independent of
// the worker count.
inline std::vector<Sample> generate(const GeometryConfig& g, const NoiseConfig& noise, std::uint64_t master_seed,
                                    std::size_t repeats, Sampler sampler = Sampler::Auto, unsigned workers = 1) {
    g.validate();
    noise.validate();
    std::vector<Sample> out(repeats);
    parallel_for(repeats, workers, [&](std::size_t r) {
        auto rng = CounterRng::for_stream(master_seed, r);
        out[r] = sample_repeat(g, noise, rng, sampler);
    });
    return out;
}

inline std::vector<OutcomeRecord> records_of(const std::vector<Sample>& samples) {
    std::vector<OutcomeRecord> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.record);
    return out;
}

} // namespace mie
