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

#include <array>
#include <random>

#include <gtest/gtest.h>

#include "mie/shadows.hpp"
#include "test_util.hpp"

namespace mie {
namespace {

Mat2 pauli(char p) {
    Mat2 m;
    const cplx i(0, 1);
    switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    default: m << 1, 0, 0, -1; break;
    }
    return m;
}

double expect(const Vec2& v, const Mat2& op) { return (v.adjoint() * op * v)(0, 0).real(); }

TEST(Shadows, BasisTableMeasuresZMinusYAndX) {
    // Outcome bit 0 is the +1 eigenvalue of the measured observable.
    EXPECT_NEAR(expect(probe_ket(Basis::Identity, 0), pauli('Z')), 1.0, 1e-15);
    EXPECT_NEAR(expect(probe_ket(Basis::RotX, 0), pauli('Y')), -1.0, 1e-15);
    EXPECT_NEAR(expect(probe_ket(Basis::RotY, 0), pauli('X')), 1.0, 1e-15);
    for (int b = 0; b < 3; ++b) {
        const Mat2 v = basis_unitary(basis_from_index(b));
        EXPECT_LT((v * v.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    }
    EXPECT_THROW(basis_from_index(3), ContractViolation);
}

TEST(Shadows, SingleShadowHasUnitTrace) {
    for (int b = 0; b < 3; ++b)
        for (int m = 0; m < 2; ++m) {
            const Mat2 s = single_shadow(basis_from_index(b), m);
            EXPECT_NEAR(s.trace().real(), 1.0, 1e-15);
            EXPECT_NEAR(qmat::spectral<2>(s).values[0], -1.0, 1e-12);
        }
}

// Exact expectation over the 36 (va, vb, ma, mb) outcomes returns rho.
TEST(Shadows, EnumerationIsUnbiased) {
    std::mt19937_64 gen(21);
    for (int t = 0; t < 20; ++t) {
        const Mat4 rho = testing::ginibre_density(gen);
        Mat4 acc = Mat4::Zero();
        for (int va = 0; va < 3; ++va)
            for (int vb = 0; vb < 3; ++vb)
                for (int ma = 0; ma < 2; ++ma)
                    for (int mb = 0; mb < 2; ++mb) {
                        const Basis a = basis_from_index(va), b = basis_from_index(vb);
                        acc += outcome_probability(rho, a, b, ma, mb) / 9.0 * shadow_from(a, b, ma, mb).joint();
                    }
        EXPECT_LT((acc - rho).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Shadows, OutcomeProbabilitiesSumToOne) {
    std::mt19937_64 gen(22);
    const Mat4 rho = testing::ginibre_density(gen);
    for (int va = 0; va < 3; ++va)
        for (int vb = 0; vb < 3; ++vb) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k)
                s += outcome_probability(rho, basis_from_index(va), basis_from_index(vb), k >> 1, k & 1);
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
}

TEST(Shadows, MeasureProbesFollowsBornRule) {
    std::mt19937_64 gen(23);
    const Mat4 rho = testing::ginibre_density(gen);
    CounterRng rng(5);
    std::array<int, 4> counts{};
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const auto [a, b] = measure_probes(rho, Basis::RotX, Basis::RotY, rng);
        ++counts[2 * a + b];
    }
    for (int k = 0; k < 4; ++k) {
        const double p = outcome_probability(rho, Basis::RotX, Basis::RotY, k >> 1, k & 1);
        EXPECT_NEAR(counts[k] / double(n), p, 5 * std::sqrt(p * (1 - p) / n) + 1e-9);
    }
}

TEST(Shadows, ProductKetOrdersProbeAFirst) {
    const Vec4 k = product_ket(Basis::Identity, Basis::Identity, 1, 0);
    EXPECT_NEAR(std::abs(k[2]), 1.0, 1e-15);
}

} // namespace
} // namespace mie
