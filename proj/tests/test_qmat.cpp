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
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "mie/qmat.hpp"
#include "test_util.hpp"

namespace mie {
namespace {

using testing::ginibre_density;

Mat4 werner(double p) {
    return p * qmat::pure(qmat::bell_state(3)) + (1.0 - p) / 4.0 * Mat4::Identity();
}

TEST(Qmat, BellStatesAreOrthonormal) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            EXPECT_NEAR(std::abs(qmat::bell_state(i).dot(qmat::bell_state(j))), i == j ? 1.0 : 0.0, 1e-15);
    EXPECT_THROW(qmat::bell_state(4), ContractViolation);
}

TEST(Qmat, PartialTransposeMatchesIndexOracle) {
    std::mt19937_64 gen(1);
    for (int t = 0; t < 50; ++t) {
        const Mat4 rho = ginibre_density(gen);
        EXPECT_LT((qmat::partial_transpose(rho) - testing::oracle_partial_transpose(rho)).cwiseAbs().maxCoeff(),
                  1e-15);
    }
}

TEST(Qmat, PartialTransposeOfProductTransposesFirstFactor) {
    Mat2 a, b;
    a << cplx(1, 0), cplx(2, 1), cplx(3, -1), cplx(4, 0);
    b << cplx(0, 1), cplx(5, 0), cplx(6, 2), cplx(7, 0);
    const Mat4 pt = qmat::partial_transpose(qmat::kron(a, b));
    EXPECT_LT((pt - qmat::kron(a.transpose(), b)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Qmat, BellStateNegativityIsOneHalf) {
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(qmat::negativity(qmat::pure(qmat::bell_state(i))), 0.5, 1e-12);
}

TEST(Qmat, WernerNegativityClosedForm) {
    for (double p : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.7, 1.0})
        EXPECT_NEAR(qmat::negativity(werner(p)), std::max(0.0, (3.0 * p - 1.0) / 4.0), 1e-12) << p;
}

TEST(Qmat, NegativityMatchesOracleAndIsBounded) {
    std::mt19937_64 gen(2);
    for (int t = 0; t < 100; ++t) {
        const Mat4 rho = ginibre_density(gen, 1 + t % 4);
        const double n = qmat::negativity(rho);
        EXPECT_NEAR(n, testing::oracle_negativity(rho), 1e-10);
        EXPECT_GE(n, 0.0);
        EXPECT_LE(n, 0.5 + 1e-12);
    }
}

TEST(Qmat, ProductStatesHaveZeroNegativity) {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 20; ++t) {
        const Mat4 a = ginibre_density(gen);
        EXPECT_NEAR(qmat::negativity(qmat::kron(qmat::trace_out_b(a), qmat::trace_out_a(a))), 0.0, 1e-12);
    }
}

TEST(Qmat, NegProjectorSelectsNegativeEigenspace) {
    const Mat4 pt = qmat::partial_transpose(qmat::pure(qmat::bell_state(0)));
    const Mat4 p = qmat::neg_projector<4>(pt);
    EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
    EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(-qmat::trace_product<4>(pt, p), 0.5, 1e-12);
}

TEST(Qmat, MatrixLogMatchesEigenMatrixFunctions) {
    std::mt19937_64 gen(4);
    for (int t = 0; t < 20; ++t) {
        const Mat4 rho = ginibre_density(gen);
        const Mat4 oracle = rho.log() / std::log(2.0);
        EXPECT_LT((qmat::matrix_log2<4>(rho) - oracle).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((qmat::matrix_exp2<4>(qmat::matrix_log2<4>(rho)) - rho).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Qmat, MatrixLogFloorsZeroEigenvalues) {
    const Mat4 l = qmat::matrix_log2<4>(qmat::pure(qmat::bell_state(0)));
    EXPECT_TRUE(l.allFinite());
    EXPECT_NEAR(l.trace().real(), 3.0 * std::log2(qmat::kLogFloor), 1e-6);
}

TEST(Qmat, EntropyMatchesOracle) {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 50; ++t) {
        const Mat4 rho = ginibre_density(gen, 1 + t % 4);
        EXPECT_NEAR(qmat::von_neumann_entropy<4>(rho), testing::oracle_entropy(rho), 1e-9);
        const Mat2 a = qmat::trace_out_b(rho);
        EXPECT_NEAR(qmat::von_neumann_entropy<2>(a), testing::oracle_entropy2(a), 1e-9);
    }
    EXPECT_NEAR(qmat::von_neumann_entropy<4>(Mat4(Mat4::Identity() / 4.0)), 2.0, 1e-12);
}

TEST(Qmat, CrossEntropyObeysKleinInequality) {
    std::mt19937_64 gen(6);
    for (int t = 0; t < 100; ++t) {
        const Mat4 rho = ginibre_density(gen);
        const Mat4 sigma = ginibre_density(gen);
        EXPECT_GE(qmat::cross_entropy<4>(rho, sigma), qmat::von_neumann_entropy<4>(rho) - 1e-9);
        EXPECT_NEAR(qmat::quantum_kl<4>(rho, rho), 0.0, 1e-9);
    }
}

TEST(Qmat, TraceProductIsTraceOfProduct) {
    std::mt19937_64 gen(7);
    const Mat4 a = ginibre_density(gen), b = ginibre_density(gen);
    EXPECT_NEAR(qmat::trace_product<4>(a, b), (a * b).trace().real(), 1e-14);
}

TEST(Qmat, TraceDistanceOfPureStates) {
    std::mt19937_64 gen(8);
    for (int t = 0; t < 20; ++t) {
        const Vec4 x = testing::random_ket(gen), y = testing::random_ket(gen);
        const double overlap = std::norm(x.dot(y));
        EXPECT_NEAR(qmat::trace_distance<4>(qmat::pure(x), qmat::pure(y)), std::sqrt(1.0 - overlap), 1e-10);
    }
}

TEST(Qmat, DepolarizeKeepsTraceAndMixes) {
    std::mt19937_64 gen(9);
    const Mat4 rho = ginibre_density(gen);
    EXPECT_NEAR(qmat::depolarize<4>(rho, 0.3).trace().real(), 1.0, 1e-14);
    EXPECT_LT((qmat::depolarize<4>(rho, 1.0) - Mat4::Identity() / 4.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Qmat, PartialTracesOfProduct) {
    Mat2 a = Mat2::Zero(), b = Mat2::Zero();
    a(0, 0) = 0.25;
    a(1, 1) = 0.75;
    b(0, 0) = b(1, 1) = 0.5;
    b(0, 1) = b(1, 0) = 0.5;
    const Mat4 ab = qmat::kron(a, b);
    EXPECT_LT((qmat::trace_out_b(ab) - a).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((qmat::trace_out_a(ab) - b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Qmat, DensityViolationReportsEachFailure) {
    EXPECT_TRUE(qmat::is_density<4>(Mat4(Mat4::Identity() / 4.0)));
    EXPECT_NE(qmat::density_violation<4>(Mat4(Mat4::Identity())).find("trace"), std::string::npos);
    Mat4 h = Mat4::Identity() / 4.0;
    h(0, 1) = cplx(0.1, 0);
    EXPECT_NE(qmat::density_violation<4>(h).find("Hermitian"), std::string::npos);
    EXPECT_NE(qmat::density_violation<4>(qmat::partial_transpose(qmat::pure(qmat::bell_state(0)))).find("negative"),
              std::string::npos);
    h = Mat4::Identity() / 4.0;
    h(2, 2) = cplx(std::nan(""), 0);
    EXPECT_NE(qmat::density_violation<4>(h).find("finite"), std::string::npos);
}

} // namespace
} // namespace mie
