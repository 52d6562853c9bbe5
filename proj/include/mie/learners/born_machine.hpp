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
 * Matrix-product Born machine for chains.
 *
 * Tensors (complex, row-major):
 *   A [2, chi, chi]        probe bit a, bonds (alpha_0, alpha_1)
 *   M [L-2, 2, chi, chi]   site, outcome bit, bonds (alpha_i, alpha_i+1)
 *   B [2, chi, chi]        probe bit b, bonds (alpha_L-1, alpha_L)
 *
 * With W = M[0, m_0] ... M[L-3, m_L-3] and X_ab = A_a W B_b, each pair of
 * outer bonds k = (alpha_0, alpha_L) contributes a vector x_k[2a+b] =
 * (X_ab)_k and the unnormalized prediction is sum_k x_k x_k^dagger. This
 * is the ket/bra doubled ladder, PSD by construction.
 */

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mie/learners/model.hpp"

namespace mie::learn {

struct BornConfig {
    int L = 10;
    int chi = 4;
    // M[i, 0] starts at the identity and M[i, 1] at a Haar unitary, both plus
    // this much Gaussian noise. A near-constant start sits on a plateau: the
    // target depends on full parities of m, which carry no low-order signal.
    double init_noise = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        require(L >= 4 && L % 2 == 0, "Born machine needs an even chain length >= 4");
        require(chi >= 1, "bond dimension must be positive");
        require(init_noise >= 0.0, "init_noise must be >= 0");
    }
};

class BornMachine final : public LearnedModel {
  public:
    using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using CMap = Eigen::Map<CMat>;
    using CCMap = Eigen::Map<const CMat>;

    explicit BornMachine(BornConfig config) : config_(config), geometry_(GeometryConfig::chain(config.L)) {
        config_.validate();
        const auto chi = static_cast<std::size_t>(config_.chi);
        a_ = params_.add("A", {2, chi, chi}, true);
        m_ = params_.add("M", {static_cast<std::size_t>(config_.L - 2), 2, chi, chi}, true);
        b_ = params_.add("B", {2, chi, chi}, true);
        CounterRng rng = CounterRng::for_stream(config_.seed, 0xB0);
        const double s = 1.0 / std::sqrt(2.0 * config_.chi);
        params_.fill_normal(a_, s, rng);
        params_.fill_normal(b_, s, rng);
        params_.fill_normal(m_, config_.init_noise / std::sqrt(2.0 * config_.chi), rng);
        for (int i = 0; i < sites(); ++i) {
            site(i, 0) += CMat::Identity(config_.chi, config_.chi);
            site(i, 1) += random_unitary(config_.chi, rng);
        }
    }

    std::string kind() const override { return "born"; }
    ParamStore& params() override { return params_; }
    const ParamStore& params() const override { return params_; }
    const GeometryConfig& geometry() const override { return geometry_; }
    const BornConfig& config() const { return config_; }

    nlohmann::json hyperparameters() const override {
        return {{"chi", config_.chi}, {"init_noise", config_.init_noise}, {"seed", config_.seed}};
    }

    Mat4 predict_masked(std::span<const std::uint8_t> m, const AccessMask&) const override {
        check_length(m);
        const CMat w = chain_product(m);
        CMat x[4];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) x[2 * a + b] = bound(a_, a) * w * bound(b_, b);
        Mat4 rho;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) rho(i, j) = (x[i].array() * x[j].array().conjugate()).sum();
        const double tr = rho.trace().real();
        if (!(tr >= 1e-300) || !std::isfinite(tr)) throw NumericalError("Born machine prediction has vanishing trace");
        return qmat::hermitize<4>(rho / tr);
    }

    double loss_and_grad(std::span<const TrainExample* const> batch, const AccessMask&,
                         ParamVector& grad) const override {
        require(!batch.empty(), "empty minibatch");
        grad.assign(params_.size(), 0.0);
        const int n = sites();
        const int chi = config_.chi;
        const double inv_b = 1.0 / static_cast<double>(batch.size());
        const auto gview = [&](std::size_t t, std::size_t off) {
            return CMap(reinterpret_cast<cplx*>(grad.data() + params_.spec(t).offset) + off, chi, chi);
        };
        const std::size_t blk = static_cast<std::size_t>(chi) * chi;

        std::vector<CMat> prefix(n + 1), suffix(n + 1);
        double total = 0.0;
        for (const TrainExample* ex : batch) {
            check_length(ex->m);
            prefix[0] = CMat::Identity(chi, chi);
            for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * site(i, ex->m[i]);
            suffix[n] = CMat::Identity(chi, chi);
            for (int i = n - 1; i >= 0; --i) suffix[i] = site(i, ex->m[i]) * suffix[i + 1];
            const CMat& w = prefix[n];

            const CMat abar = std::conj(ex->psi_a[0]) * bound(a_, 0) + std::conj(ex->psi_a[1]) * bound(a_, 1);
            const CMat bbar = std::conj(ex->psi_b[0]) * bound(b_, 0) + std::conj(ex->psi_b[1]) * bound(b_, 1);
            const CMat wb = w * bbar;
            const CMat y = abar * wb;
            const double num = y.squaredNorm();

            CMat aw[2], wbb[2], x[4];
            double den = 0.0;
            for (int a = 0; a < 2; ++a) aw[a] = bound(a_, a) * w;
            for (int b = 0; b < 2; ++b) wbb[b] = w * bound(b_, b);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    x[2 * a + b] = aw[a] * bound(b_, b);
                    den += x[2 * a + b].squaredNorm();
                }
            if (!(num > 0.0) || !(den > 0.0)) throw NumericalError("Born machine likelihood vanished");
            total += (std::log(den) - std::log(num)) * kInvLn2;

            const double cn = -2.0 * kInvLn2 / num * inv_b;
            const double cd = 2.0 * kInvLn2 / den * inv_b;
            // Gradient with respect to W, A_a and B_b.
            CMat gw = cn * (abar.adjoint() * y * bbar.adjoint());
            const CMat gabar = cn * (y * wb.adjoint());
            const CMat gbbar = cn * ((abar * w).adjoint() * y);
            for (int a = 0; a < 2; ++a) gview(a_, a * blk) += ex->psi_a[a] * gabar;
            for (int b = 0; b < 2; ++b) gview(b_, b * blk) += ex->psi_b[b] * gbbar;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const CMat& xab = x[2 * a + b];
                    gw += cd * (bound(a_, a).adjoint() * xab * bound(b_, b).adjoint());
                    gview(a_, a * blk) += cd * (xab * wbb[b].adjoint());
                    gview(b_, b * blk) += cd * (aw[a].adjoint() * xab);
                }
            for (int i = 0; i < n; ++i)
                gview(m_, (static_cast<std::size_t>(i) * 2 + ex->m[i]) * blk) +=
                    prefix[i].adjoint() * gw * suffix[i + 1].adjoint();
        }
        return total * inv_b;
    }

  private:
    // Haar unitary: QR of a complex Gaussian with the phases of R removed.
    static CMat random_unitary(int n, CounterRng& rng) {
        CMat g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
        Eigen::HouseholderQR<CMat> qr(g);
        CMat q = qr.householderQ() * CMat::Identity(n, n);
        const CMat r = qr.matrixQR();
        for (int j = 0; j < n; ++j) {
            const double a = std::abs(r(j, j));
            if (a > 0.0) q.col(j) *= r(j, j) / a;
        }
        return q;
    }

    int sites() const { return config_.L - 2; }

    void check_length(std::span<const std::uint8_t> m) const {
        require(static_cast<int>(m.size()) == sites(), "outcome string length does not match the Born machine");
    }

    CCMap bound(std::size_t t, int bit) const {
        return CCMap(params_.complex(t) + static_cast<std::size_t>(bit) * config_.chi * config_.chi, config_.chi,
                     config_.chi);
    }

    CCMap site(int i, int bit) const {
        const std::size_t blk = static_cast<std::size_t>(config_.chi) * config_.chi;
        return CCMap(params_.complex(m_) + (static_cast<std::size_t>(i) * 2 + bit) * blk, config_.chi, config_.chi);
    }

    CMap site(int i, int bit) {
        const std::size_t blk = static_cast<std::size_t>(config_.chi) * config_.chi;
        return CMap(params_.complex(m_) + (static_cast<std::size_t>(i) * 2 + bit) * blk, config_.chi, config_.chi);
    }

    CMat chain_product(std::span<const std::uint8_t> m) const {
        CMat w = CMat::Identity(config_.chi, config_.chi);
        for (int i = 0; i < sites(); ++i) w = w * site(i, m[i]);
        return w;
    }

    BornConfig config_;
    GeometryConfig geometry_;
    ParamStore params_;
    std::size_t a_ = 0, m_ = 0, b_ = 0;
};

} // namespace mie::learn
