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
 * Random probe bases and two-qubit classical shadows.
 *
 * Basis index table (fixed; part of the record format):
 *
 *   0  V = 1                      measures Z
 *   1  V = exp(i pi/4 X) = (1 + iX)/sqrt2   measures -Y
 *   2  V = exp(i pi/4 Y) = (1 + iY)/sqrt2   measures  X
 *
 * A probe measured with unitary V and outcome bit m collapses onto
 * V^dagger |m>; its single-qubit shadow is 3 V^dagger|m><m|V - 1.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "mie/core.hpp"
#include "mie/qmat.hpp"
#include "mie/rng.hpp"

namespace mie {

enum class Basis : std::uint8_t { Identity = 0, RotX = 1, RotY = 2 };

inline constexpr int kNumBases = 3;

inline Basis basis_from_index(int i) {
    require(i >= 0 && i < kNumBases, "basis index must be 0, 1 or 2");
    return static_cast<Basis>(i);
}

inline int basis_index(Basis b) { return static_cast<int>(b); }

inline Mat2 basis_unitary(Basis b) {
    const double r = 1.0 / std::sqrt(2.0);
    const cplx i(0.0, 1.0);
    Mat2 v;
    switch (b) {
    case Basis::Identity: v << 1.0, 0.0, 0.0, 1.0; break;
    case Basis::RotX: v << r, i * r, i * r, r; break;
    case Basis::RotY: v << r, r, -r, r; break;
    }
    return v;
}

inline Basis draw_basis(CounterRng& rng) { return static_cast<Basis>(rng.index(kNumBases)); }

// V^dagger |m>.
inline Vec2 probe_ket(Basis b, int m) {
    return basis_unitary(b).adjoint().col(m);
}

// |psi_A> (x) |psi_B>, the observed product state used by the NLL loss.
inline Vec4 product_ket(Basis va, Basis vb, int ma, int mb) {
    const Vec2 a = probe_ket(va, ma);
    const Vec2 b = probe_ket(vb, mb);
    return Vec4(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]);
}

inline Mat2 single_shadow(Basis b, int m) {
    return 3.0 * qmat::pure(probe_ket(b, m)) - Mat2::Identity();
}

struct ShadowPair {
    Mat2 a;
    Mat2 b;

    Mat4 joint() const { return qmat::kron(a, b); }
};

inline ShadowPair shadow_from(Basis va, Basis vb, int ma, int mb) {
    return {single_shadow(va, ma), single_shadow(vb, mb)};
}

// Born probability of (ma, mb) after rotating rho by V_A (x) V_B.
inline double outcome_probability(const Mat4& rho, Basis va, Basis vb, int ma, int mb) {
    const Vec4 psi = product_ket(va, vb, ma, mb);
    return std::max(0.0, (psi.adjoint() * rho * psi)(0, 0).real());
}

inline std::pair<int, int> measure_probes(const Mat4& rho, Basis va, Basis vb, CounterRng& rng) {
    std::array<double, 4> p{};
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        p[k] = outcome_probability(rho, va, vb, k >> 1, k & 1);
        total += p[k];
    }
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int k = 0;
    for (; k < 3; ++k) {
        acc += p[k];
        if (u < acc) break;
    }
    return {k >> 1, k & 1};
}

} // namespace mie
