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

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mie/cluster_sim.hpp"
#include "mie/estimators.hpp"
#include "mie/learners/params.hpp"
#include "mie/shadows.hpp"

namespace mie::learn {

inline constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

// What a learner sees of one repeat: the outcome string and the observed
// probe product state |psi_A> (x) |psi_B>.
struct TrainExample {
    Bits m;
    Vec2 psi_a;
    Vec2 psi_b;

    Vec4 psi() const { return Vec4(psi_a[0] * psi_b[0], psi_a[0] * psi_b[1], psi_a[1] * psi_b[0], psi_a[1] * psi_b[1]); }
};

inline TrainExample to_example(const OutcomeRecord& r) {
    return {r.m, probe_ket(r.va, r.ma), probe_ket(r.vb, r.mb)};
}

inline std::vector<TrainExample> to_examples(std::span<const OutcomeRecord> records) {
    std::vector<TrainExample> out;
    out.reserve(records.size());
    for (const auto& r : records)
        if (!r.discarded) out.push_back(to_example(r));
    return out;
}

// -log2 max(<psi|rho|psi>, 1e-300).
inline double nll_loss(const Vec4& psi, const Mat4& rho) {
    const double p = (psi.adjoint() * rho * psi)(0, 0).real();
    return -std::log2(std::max(p, 1e-300));
}

// Accessible flags over positions of m; empty means every site.
using AccessMask = std::vector<std::uint8_t>;

/*!
 * A computational model with trainable parameters. loss_and_grad returns
 * the minibatch-mean NLL in bits and overwrites `grad` (same layout as
 * params().data()) with its exact gradient.
 */
class LearnedModel : public ComputationalModel {
  public:
    virtual ParamStore& params() = 0;
    virtual const ParamStore& params() const = 0;
    virtual const GeometryConfig& geometry() const = 0;
    virtual nlohmann::json hyperparameters() const = 0;

    virtual Mat4 predict_masked(std::span<const std::uint8_t> m, const AccessMask& mask) const = 0;
    virtual double loss_and_grad(std::span<const TrainExample* const> batch, const AccessMask& mask,
                                 ParamVector& grad) const = 0;

    Mat4 predict(std::span<const std::uint8_t> m) const override { return predict_masked(m, {}); }

    double loss(std::span<const TrainExample* const> batch, const AccessMask& mask = {}) const {
        double s = 0.0;
        for (const TrainExample* ex : batch) s += nll_loss(ex->psi(), predict_masked(ex->m, mask));
        return s / static_cast<double>(batch.size());
    }
};

} // namespace mie::learn
