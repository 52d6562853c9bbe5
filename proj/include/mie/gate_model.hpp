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

#include <span>
#include <string>

#include "mie/cluster_sim.hpp"
#include "mie/estimators.hpp"
#include "mie/qmat.hpp"

namespace mie {

inline constexpr double kDefaultGateEpsilon = 0.3;

struct GateModelConfig {
    GeometryConfig geometry;
    double epsilon = kDefaultGateEpsilon;

    void validate() const {
        geometry.validate();
        require(epsilon >= 0.0 && epsilon <= 1.0, "gate model epsilon must be in [0, 1]");
    }
};

// (1 - eps) exact_state_1d(m) + (eps/4) 1.
inline Mat4 predict_1d(std::span<const std::uint8_t> m, double epsilon = kDefaultGateEpsilon) {
    require(epsilon >= 0.0 && epsilon <= 1.0, "gate model epsilon must be in [0, 1]");
    return qmat::depolarize<4>(exact_state_1d(m), epsilon);
}

// Row sweep with outcomes forced to m, then depolarized. Depolarization is
// never applied inside the sweep.
inline Mat4 predict_2d(std::span<const std::uint8_t> m, const GateModelConfig& config) {
    config.validate();
    require(config.geometry.kind == Lattice::Grid, "predict_2d needs a grid geometry");
    return qmat::depolarize<4>(qmat::pure(grid_conditional(config.geometry, m).ket), config.epsilon);
}

class GateModel final : public ComputationalModel {
  public:
    explicit GateModel(GateModelConfig config) : config_(std::move(config)) { config_.validate(); }

    Mat4 predict(std::span<const std::uint8_t> m) const override {
        require(static_cast<int>(m.size()) == config_.geometry.num_measured(),
                "outcome string length does not match the gate model geometry");
        if (config_.geometry.kind == Lattice::Chain) return predict_1d(m, config_.epsilon);
        return predict_2d(m, config_);
    }

    std::string kind() const override { return "gate"; }
    const GateModelConfig& config() const { return config_; }

  private:
    GateModelConfig config_;
};

} // namespace mie
