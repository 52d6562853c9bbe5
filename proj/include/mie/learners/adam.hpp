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
#include <cstddef>
#include <span>
#include <vector>

#include "mie/core.hpp"

namespace mie::learn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        require(lr >= 0.0 && std::isfinite(lr), "learning rate must be finite and >= 0");
        require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam decays must be in [0, 1)");
        require(eps > 0.0, "Adam epsilon must be positive");
    }
};

// Bias-corrected Adam over a flat parameter vector. Real and imaginary
// parts of complex parameters are independent coordinates.
class Adam {
  public:
    Adam(std::size_t n, AdamConfig config) : config_(config), m_(n, 0.0), v_(n, 0.0) { config_.validate(); }

    void step(std::span<double> params, std::span<const double> grad) {
        require(params.size() == m_.size() && grad.size() == m_.size(), "Adam: size mismatch");
        ++t_;
        const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
            v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
            params[i] -= config_.lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.eps);
        }
    }

    // Learning-rate schedules adjust the step size between calls.
    void set_lr(double lr) {
        require(lr >= 0.0 && std::isfinite(lr), "learning rate must be finite and >= 0");
        config_.lr = lr;
    }

    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return config_; }

  private:
    AdamConfig config_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

} // namespace mie::learn
