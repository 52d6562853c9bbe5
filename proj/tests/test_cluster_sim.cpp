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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mie/cluster_sim.hpp"

namespace mie {
namespace {

Bits bits_of(std::uint64_t code, int n) {
    Bits m(n);
    for (int i = 0; i < n; ++i) m[i] = static_cast<std::uint8_t>((code >> i) & 1U);
    return m;
}

double fidelity(const Vec4& a, const Vec4& b) { return std::norm(a.dot(b)); }

TEST(Geometry, FactoriesValidate) {
    EXPECT_THROW(GeometryConfig::chain(5), ContractViolation);
    EXPECT_THROW(GeometryConfig::chain(2), ContractViolation);
    EXPECT_THROW(GeometryConfig::grid(3, 3, 0.0), ContractViolation);
    EXPECT_THROW(GeometryConfig::grid(3, 0, 0.0), ContractViolation);
    const auto g = GeometryConfig::grid(4, 3, 0.1);
    EXPECT_EQ(g.num_sites(), 16);
    EXPECT_EQ(g.num_measured(), 14);
    EXPECT_EQ(g.separation(), 3);
    EXPECT_EQ(g.m_position(0), -1);
    EXPECT_EQ(g.m_position(1), 0);
    EXPECT_EQ(g.m_position(4), 2);
    EXPECT_EQ(g.measured_sites().size(), 14u);
    EXPECT_EQ(lattice_from_string("grid"), Lattice::Grid);
    EXPECT_THROW(lattice_from_string("ring"), ContractViolation);
}

TEST(Geometry, ProtectedCopiesCountPerimeterWithDoubledCorners) {
    for (int L : {2, 3, 4, 5}) EXPECT_EQ(GeometryConfig::grid(L, L - 1, 0.0).protected_copies().size(), 4u * L);
    EXPECT_EQ(GeometryConfig::chain(10).protected_copies(), (std::vector<int>{0, 9}));
}

TEST(Chain, ParityClassTable) {
    EXPECT_EQ(chain_class(Bits{0, 0, 0, 0}), 0);
    EXPECT_EQ(chain_class(Bits{0, 1, 0, 0}), 1);
    EXPECT_EQ(chain_class(Bits{1, 0, 0, 0}), 2);
    EXPECT_EQ(chain_class(Bits{1, 1, 0, 0}), 3);
    EXPECT_EQ(chain_class(Bits{1, 1, 1, 1}), 0);
}

// The parity rule agrees with the brute-force statevector for every m.
TEST(Chain, ParityRuleMatchesStatevectorOracle) {
    for (int L : {4, 6, 8, 10}) {
        const int n = L - 2;
        for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
            const Bits m = bits_of(code, n);
            const auto oracle = chain_oracle(L, m);
            ASSERT_NEAR(fidelity(oracle.ket, exact_ket_1d(m)), 1.0, 1e-12) << "L=" << L << " code=" << code;
            ASSERT_NEAR(oracle.born_prob, std::ldexp(1.0, -n), 1e-12);
        }
    }
}

TEST(Chain, NoiselessOutcomesAreUniform) {
    const auto g = GeometryConfig::chain(6);
    const auto samples = generate(g, NoiseConfig{}, 9, 16000);
    std::vector<int> counts(16, 0);
    for (const auto& s : samples) {
        int code = 0;
        for (int i = 0; i < 4; ++i) code |= s.record.m[i] << i;
        ++counts[code];
        EXPECT_FALSE(s.record.discarded);
    }
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
    EXPECT_LT(chi2, 37.7); // 99.9% quantile, 15 dof
}

TEST(Grid, MeasurementRotationIsUnitary) {
    for (double th : {0.0, 0.3, 1.2})
        for (double ph : {0.0, kDefaultPhi}) {
            const Mat2 r = measurement_rotation(th, ph);
            EXPECT_LT((r * r.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-14);
        }
}

// Two probes joined by one ZZ link and no measured neighbour of either:
// exp(i pi/4 ZZ)|++> is maximally entangled.
TEST(Grid, SingleLinkGivesMaximalEntanglement) {
    const auto g = GeometryConfig::grid(2, 1, 0.0);
    for (std::uint64_t code = 0; code < 4; ++code) {
        const auto c = grid_conditional(g, bits_of(code, 2));
        EXPECT_NEAR(qmat::negativity(qmat::pure(c.ket)), 0.5, 1e-12);
    }
}

// Z-basis measurements cut every link, so far-apart probes stay in a
// product state.
TEST(Grid, ZMeasurementsLeaveSeparatedProbesUnentangled) {
    const auto g = GeometryConfig::grid(3, 2, 0.0);
    for (std::uint64_t code = 0; code < (1ULL << 7); ++code) {
        const auto c = grid_conditional(g, bits_of(code, 7));
        EXPECT_NEAR(qmat::negativity(qmat::pure(c.ket)), 0.0, 1e-12);
    }
}

TEST(Grid, RowSweepMatchesBruteForceAndProbabilitiesSumToOne) {
    for (double theta : {0.2 * std::numbers::pi, 0.45 * std::numbers::pi})
        for (int d : {1, 2}) {
            const auto g = GeometryConfig::grid(3, d, theta);
            double total = 0.0;
            for (std::uint64_t code = 0; code < (1ULL << 7); ++code) {
                const Bits m = bits_of(code, 7);
                const auto a = grid_conditional(g, m);
                const auto b = grid_bruteforce_conditional(g, m);
                EXPECT_LT(qmat::trace_distance<4>(qmat::pure(a.ket), qmat::pure(b.ket)), 1e-10);
                EXPECT_NEAR(a.born_prob, b.born_prob, 1e-12);
                total += b.born_prob;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
}

TEST(Grid, SamplersAgreeUnderSharedSeeds) {
    const auto g = GeometryConfig::grid(3, 2, 0.3 * std::numbers::pi);
    const auto a = generate(g, NoiseConfig{}, 4, 200, Sampler::RowSweep);
    const auto b = generate(g, NoiseConfig{}, 4, 200, Sampler::BruteForce);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].record.m, b[i].record.m);
        EXPECT_EQ(a[i].record.ma, b[i].record.ma);
        EXPECT_EQ(a[i].record.mb, b[i].record.mb);
        EXPECT_LT(qmat::trace_distance<4>(a[i].rho, b[i].rho), 1e-10);
        EXPECT_FALSE(a[i].record.born_prob.has_value());
        EXPECT_TRUE(b[i].record.born_prob.has_value());
    }
}

TEST(Generate, OutputIsIndependentOfWorkerCount) {
    const auto g = GeometryConfig::grid(3, 2, 0.7);
    const NoiseConfig noise{0.02, 0.1, true};
    const auto a = records_of(generate(g, noise, 17, 300, Sampler::Auto, 1));
    const auto b = records_of(generate(g, noise, 17, 300, Sampler::Auto, 3));
    EXPECT_EQ(a, b);
}

TEST(Noise, DetectionDiscardRateMatchesClosedForm) {
    const double p = 0.1;
    const auto samples = generate(GeometryConfig::chain(6), NoiseConfig{p, 0.0, true}, 2, 40000);
    int discarded = 0;
    for (const auto& s : samples) discarded += s.record.discarded;
    const double per_copy = 2 * p * (1 - p);
    const double expect = 1.0 - std::pow(1.0 - per_copy, 2);
    EXPECT_NEAR(discarded / 40000.0, expect, 5 * std::sqrt(expect * (1 - expect) / 40000));
}

TEST(Noise, DetectionOffKeepsEverything) {
    const auto samples = generate(GeometryConfig::chain(6), NoiseConfig{0.2, 0.0, false}, 2, 500);
    for (const auto& s : samples) EXPECT_FALSE(s.record.discarded);
}

TEST(Noise, ProbeDepolarizationMixesTheState) {
    const auto samples = generate(GeometryConfig::chain(4), NoiseConfig{0.0, 0.3, true}, 3, 20);
    for (const auto& s : samples) {
        const Mat4 ideal = exact_state_1d(s.record.m);
        EXPECT_LT((s.rho - qmat::depolarize<4>(ideal, 0.3)).cwiseAbs().maxCoeff(), 1e-14);
    }
    EXPECT_THROW(NoiseConfig({0.0, 1.5, true}).validate(), ContractViolation);
}

// Shadows averaged over many repeats with the same class reproduce rho_m.
TEST(Generate, ClassAveragedShadowsApproachRho) {
    const auto samples = generate(GeometryConfig::chain(4), NoiseConfig{}, 5, 40000);
    Mat4 acc[4] = {Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
    int count[4] = {0, 0, 0, 0};
    for (const auto& s : samples) {
        const int k = chain_class(s.record.m);
        acc[k] += s.record.shadow().joint();
        ++count[k];
    }
    for (int k = 0; k < 4; ++k) {
        const Mat4 mean = acc[k] / count[k];
        EXPECT_LT((mean - qmat::pure(qmat::bell_state(k))).cwiseAbs().maxCoeff(), 0.1) << k;
    }
}

} // namespace
} // namespace mie
