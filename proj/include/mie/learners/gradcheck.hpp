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

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mie/learners/model.hpp"
#include "mie/rng.hpp"

namespace mie::learn {

struct GradCheckReport {
    std::size_t coordinates = 0;
    double worst_relative_error = 0.0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/*!
 * Compares loss_and_grad with central differences of loss() on randomly
 * chosen coordinates. Relative error is |a - n| / max(|a| + |n|, floor);
 * the floor keeps coordinates with a vanishing gradient from dividing by
 * zero. Parameters are restored exactly.
 */
inline GradCheckReport gradient_check(LearnedModel& model, std::span<const TrainExample* const> batch,
                                      const AccessMask& mask = {}, std::size_t coordinates = 50, double step = 1e-4,
                                      std::uint64_t seed = 0, double floor = 1e-6) {
    ParamVector grad;
    model.loss_and_grad(batch, mask, grad);
    auto& data = model.params().data();
    auto rng = CounterRng::for_stream(seed, 0x67C);
    GradCheckReport rep;
    for (std::size_t k = 0; k < coordinates; ++k) {
        const std::size_t i = rng.index(data.size());
        const double saved = data[i];
        data[i] = saved + step;
        const double up = model.loss(batch, mask);
        data[i] = saved - step;
        const double down = model.loss(batch, mask);
        data[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double rel = std::abs(numeric - grad[i]) / std::max(floor, std::abs(numeric) + std::abs(grad[i]));
        if (rel >= rep.worst_relative_error) {
            rep.worst_relative_error = rel;
            rep.worst_index = i;
            rep.worst_analytic = grad[i];
            rep.worst_numeric = numeric;
        }
        ++rep.coordinates;
    }
    return rep;
}

} // namespace mie::learn
