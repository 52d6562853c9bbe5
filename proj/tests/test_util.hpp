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

// Shared helpers for the test binaries. Random states come from std::mt19937
// so that they do not share code with the library generator under test.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "mie/core.hpp"

namespace mie::testing {

inline Mat4 ginibre_density(std::mt19937_64& gen, int rank = 4) {
    std::normal_distribution<double> n;
    Eigen::Matrix<cplx, 4, Eigen::Dynamic> g(4, rank);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < rank; ++j) g(i, j) = cplx(n(gen), n(gen));
    Mat4 rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline Vec4 random_ket(std::mt19937_64& gen) {
    std::normal_distribution<double> n;
    Vec4 v;
    for (int i = 0; i < 4; ++i) v[i] = cplx(n(gen), n(gen));
    return v.normalized();
}

// Eigenvalues through the general (non-Hermitian) solver, as an oracle
// independent of the self-adjoint path used by the library.
inline Eigen::Vector4d oracle_eigenvalues(const Mat4& x) {
    Eigen::ComplexEigenSolver<Mat4> es(x);
    Eigen::Vector4d v;
    for (int i = 0; i < 4; ++i) v[i] = es.eigenvalues()[i].real();
    std::sort(v.data(), v.data() + 4);
    return v;
}

// Partial transpose on A written with explicit tensor indices
// rho[(a b), (a' b')] -> rho[(a' b), (a b')].
inline Mat4 oracle_partial_transpose(const Mat4& rho) {
    Mat4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const int a = r / 2, b = r % 2, ap = c / 2, bp = c % 2;
            out(ap * 2 + b, a * 2 + bp) = rho(r, c);
        }
    return out;
}

inline double oracle_negativity(const Mat4& rho) {
    const auto ev = oracle_eigenvalues(oracle_partial_transpose(rho));
    double n = 0.0;
    for (int i = 0; i < 4; ++i) n += std::max(0.0, -ev[i]);
    return n;
}

inline double oracle_entropy(const Mat4& rho) {
    const auto ev = oracle_eigenvalues(rho);
    double h = 0.0;
    for (int i = 0; i < 4; ++i)
        if (ev[i] > 1e-15) h -= ev[i] * std::log2(ev[i]);
    return h;
}

inline double oracle_entropy2(const Mat2& rho) {
    const double tr = rho.trace().real();
    const double det = (rho(0, 0) * rho(1, 1) - rho(0, 1) * rho(1, 0)).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    double h = 0.0;
    for (double l : {tr / 2 + disc, tr / 2 - disc})
        if (l > 1e-15) h -= l * std::log2(l);
    return h;
}

} // namespace mie::testing
