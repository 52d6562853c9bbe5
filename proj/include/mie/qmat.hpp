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
 * Dense one- and two-qubit matrix primitives.
 *
 * Two-qubit matrices use tensor order A (x) B over |00>, |01>, |10>, |11>,
 * i.e. row index 2a + b. Entropies are in bits. Every routine that
 * diagonalizes first replaces X by (X + X^dagger)/2.
 */

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mie/core.hpp"

namespace mie::qmat {

// Eigenvalues below this floor are clamped before taking logarithms. For a
// rank-deficient model paired with a state that has weight outside the
// model's support, results depend on this value.
inline constexpr double kLogFloor = 1e-12;

// Eigenvalues below -kNegThreshold count as negative in neg_projector.
inline constexpr double kNegThreshold = 1e-10;

template <int N>
using Mat = Eigen::Matrix<cplx, N, N>;

template <int N>
struct SpectralDecomposition {
    Eigen::Matrix<double, N, 1> values; // ascending
    Mat<N> vectors;                     // column i pairs with values[i]
};

template <int N>
Mat<N> hermitize(const Mat<N>& x) {
    return (x + x.adjoint()) * 0.5;
}

template <int N>
SpectralDecomposition<N> spectral(const Mat<N>& x) {
    Eigen::SelfAdjointEigenSolver<Mat<N>> solver(hermitize<N>(x));
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

template <int N>
Mat<N> reconstruct(const SpectralDecomposition<N>& s) {
    return s.vectors * s.values.template cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

// Transpose on the A factor: out[2a'+b, 2a+b'] = in[2a+b, 2a'+b'].
inline Mat4 partial_transpose(const Mat4& rho) {
    Mat4 out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int ap = 0; ap < 2; ++ap)
                for (int bp = 0; bp < 2; ++bp) out(2 * ap + b, 2 * a + bp) = rho(2 * a + b, 2 * ap + bp);
    return out;
}

inline Mat2 trace_out_b(const Mat4& rho) {
    Mat2 out;
    for (int a = 0; a < 2; ++a)
        for (int ap = 0; ap < 2; ++ap) out(a, ap) = rho(2 * a, 2 * ap) + rho(2 * a + 1, 2 * ap + 1);
    return out;
}

inline Mat2 trace_out_a(const Mat4& rho) {
    Mat2 out;
    for (int b = 0; b < 2; ++b)
        for (int bp = 0; bp < 2; ++bp) out(b, bp) = rho(b, bp) + rho(2 + b, 2 + bp);
    return out;
}

inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

// Projector onto the span of eigenvectors with eigenvalue < -tau.
template <int N>
Mat<N> neg_projector(const SpectralDecomposition<N>& s, double tau = kNegThreshold) {
    Mat<N> p = Mat<N>::Zero();
    for (int i = 0; i < N; ++i)
        if (s.values[i] < -tau) p.noalias() += s.vectors.col(i) * s.vectors.col(i).adjoint();
    return p;
}

template <int N>
Mat<N> neg_projector(const Mat<N>& x, double tau = kNegThreshold) {
    return neg_projector<N>(spectral<N>(x), tau);
}

// -Tr[Pi(rho^TA) rho^TA].
inline double negativity(const Mat4& rho) {
    const auto s = spectral<4>(partial_transpose(rho));
    double n = 0.0;
    for (int i = 0; i < 4; ++i)
        if (s.values[i] < -kNegThreshold) n -= s.values[i];
    return n;
}

// log2 with eigenvalues clamped to max(lambda, floor), same eigenbasis.
template <int N>
Mat<N> matrix_log2(const SpectralDecomposition<N>& s, double floor = kLogFloor) {
    Eigen::Matrix<double, N, 1> logs;
    for (int i = 0; i < N; ++i) logs[i] = std::log2(std::max(s.values[i], floor));
    return s.vectors * logs.template cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

template <int N>
Mat<N> matrix_log2(const Mat<N>& rho, double floor = kLogFloor) {
    return matrix_log2<N>(spectral<N>(rho), floor);
}

template <int N>
Mat<N> matrix_exp2(const Mat<N>& h) {
    const auto s = spectral<N>(h);
    Eigen::Matrix<double, N, 1> e;
    for (int i = 0; i < N; ++i) e[i] = std::exp2(s.values[i]);
    return s.vectors * e.template cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

// -sum lambda log2 lambda with 0 log 0 := 0.
template <int N>
double von_neumann_entropy(const Mat<N>& rho) {
    const auto s = spectral<N>(rho);
    double h = 0.0;
    for (int i = 0; i < N; ++i)
        if (s.values[i] > 0.0) h -= s.values[i] * std::log2(s.values[i]);
    return h;
}

// Real part of Tr[a b]; skips forming the product.
template <int N>
double trace_product(const Mat<N>& a, const Mat<N>& b) {
    return (a.transpose().array() * b.array()).sum().real();
}

// -Tr[rho log2 model]. rho may be any trace-1 Hermitian matrix (a shadow).
template <int N>
double cross_entropy(const Mat<N>& rho, const Mat<N>& model, double floor = kLogFloor) {
    return -trace_product<N>(rho, matrix_log2<N>(model, floor));
}

template <int N>
double quantum_kl(const Mat<N>& rho, const Mat<N>& model, double floor = kLogFloor) {
    return cross_entropy<N>(rho, model, floor) - von_neumann_entropy<N>(rho);
}

template <int N>
double max_abs(const Mat<N>& x) {
    return x.cwiseAbs().maxCoeff();
}

// 0.5 * ||a - b||_1 for Hermitian a, b.
template <int N>
double trace_distance(const Mat<N>& a, const Mat<N>& b) {
    return 0.5 * spectral<N>(a - b).values.cwiseAbs().sum();
}

template <int N>
Mat<N> depolarize(const Mat<N>& rho, double q) {
    return (1.0 - q) * rho + (q / N) * Mat<N>::Identity();
}

inline Mat4 pure(const Vec4& psi) { return psi * psi.adjoint(); }
inline Mat2 pure(const Vec2& psi) { return psi * psi.adjoint(); }

// Describes why a matrix fails the density-matrix invariants; empty if it
// passes (Hermitian to herm_tol, unit trace to trace_tol, eigenvalues
// >= -psd_tol).
template <int N>
std::string density_violation(const Mat<N>& rho, double herm_tol = 1e-12, double trace_tol = 1e-12,
                              double psd_tol = 1e-10) {
    if (!rho.allFinite()) return "non-finite entries";
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) return "not Hermitian (deviation " + std::to_string(herm) + ")";
    const double tr_err = std::abs(rho.trace() - cplx(1.0));
    if (tr_err > trace_tol) return "trace differs from 1 by " + std::to_string(tr_err);
    const double lmin = spectral<N>(rho).values[0];
    if (lmin < -psd_tol) return "negative eigenvalue " + std::to_string(lmin);
    return {};
}

template <int N>
bool is_density(const Mat<N>& rho, double herm_tol = 1e-12, double trace_tol = 1e-12, double psd_tol = 1e-10) {
    return density_violation<N>(rho, herm_tol, trace_tol, psd_tol).empty();
}

// Common two-qubit states used by the chain geometry and the tests.
inline Vec4 bell_state(int index) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (index) {
    case 0: return Vec4(r, 0, 0, r);  // (|00> + |11>)/sqrt2
    case 1: return Vec4(r, 0, 0, -r); // (|00> - |11>)/sqrt2
    case 2: return Vec4(0, r, r, 0);  // (|01> + |10>)/sqrt2
    case 3: return Vec4(0, r, -r, 0); // (|01> - |10>)/sqrt2
    default: throw ContractViolation("bell_state index must be in 0..3");
    }
}

} // namespace mie::qmat
