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
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mie/estimators.hpp"
#include "mie/learners/adam.hpp"
#include "mie/learners/masking.hpp"
#include "mie/learners/model.hpp"

namespace mie::learn {

struct TrainConfig {
    std::size_t batch_size = 64;
    double epochs = 1.0;
    AdamConfig adam;
    std::uint64_t seed = 0;
    bool masking = true; // grids only
    // Epoch positions at which the validation curve is sampled. 0 and the
    // final epoch are always included.
    std::vector<double> checkpoints;
    unsigned workers = 1; // validation only; training is single-threaded
    // Cosine decay of the learning rate from adam.lr at step 0 to zero at
    // the last step. Without it the attention model keeps jumping off the
    // learned solution late in training.
    bool cosine_decay = true;

    void validate() const {
        require(batch_size >= 1, "batch size must be positive");
        require(epochs > 0.0 && std::isfinite(epochs), "epochs must be positive");
        adam.validate();
        for (double c : checkpoints) require(c >= 0.0 && c <= epochs, "checkpoints must lie in [0, epochs]");
    }
};

struct CurvePoint {
    double epoch = 0.0;
    std::size_t step = 0;
    EstimateWithError entropy;    // held-out S^QC
    EstimateWithError negativity; // held-out N^QC
    double train_loss = std::numeric_limits<double>::quiet_NaN(); // mean since previous point
};

struct TrainResult {
    std::vector<CurvePoint> curve;
    std::size_t steps = 0;
    bool aborted = false;
    std::string diagnostic;
};

/*!
 * Minibatch Adam on the mean NLL. Epoch e visits the training examples in
 * the order of a Fisher-Yates shuffle drawn from stream (seed, e); step s
 * draws its grid access mask from stream (seed ^ mask tag, s). The same
 * seed, config and data give a bitwise-identical curve.
 *
 * A non-finite loss or gradient stops training, restores the parameters of
 * the last curve point and sets `aborted`.
 */
inline TrainResult train(LearnedModel& model, std::span<const OutcomeRecord> train_records,
                         std::span<const OutcomeRecord> validation, const TrainConfig& config,
                         const std::function<void(const CurvePoint&)>& on_point = {}) {
    config.validate();
    const auto examples = to_examples(train_records);
    require(!examples.empty(), "no non-discarded training records");
    const std::size_t n = examples.size();
    const std::size_t per_epoch = (n + config.batch_size - 1) / config.batch_size;
    const auto total_steps = static_cast<std::size_t>(std::ceil(config.epochs * static_cast<double>(per_epoch)));

    std::vector<std::size_t> marks;
    marks.push_back(0);
    for (double c : config.checkpoints)
        marks.push_back(static_cast<std::size_t>(std::llround(c * static_cast<double>(per_epoch))));
    marks.push_back(total_steps);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    const bool masked = config.masking && model.geometry().kind == Lattice::Grid;
    constexpr std::uint64_t kMaskTag = 0x6D61736B;

    TrainResult result;
    ParamVector last_good = model.params().data();
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    const auto record_point = [&](std::size_t step) {
        const auto b = evaluate_bounds(validation, model, config.workers);
        CurvePoint p;
        p.epoch = static_cast<double>(step) / static_cast<double>(per_epoch);
        p.step = step;
        p.entropy = b.entropy;
        p.negativity = b.negativity;
        if (loss_count > 0) p.train_loss = loss_sum / static_cast<double>(loss_count);
        loss_sum = 0.0;
        loss_count = 0;
        result.curve.push_back(p);
        last_good = model.params().data();
        if (on_point) on_point(p);
    };

    Adam adam(model.params().size(), config.adam);
    ParamVector grad;
    std::vector<std::size_t> order(n);
    std::vector<const TrainExample*> batch;
    std::size_t next_mark = 0;
    if (marks[next_mark] == 0) {
        record_point(0);
        ++next_mark;
    }
    for (std::size_t step = 0; step < total_steps; ++step) {
        const std::size_t epoch = step / per_epoch;
        const std::size_t within = step % per_epoch;
        if (within == 0) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            auto rng = CounterRng::for_stream(config.seed, epoch);
            shuffle(order.begin(), order.end(), rng);
        }
        batch.clear();
        const std::size_t lo = within * config.batch_size;
        const std::size_t hi = std::min(n, lo + config.batch_size);
        for (std::size_t i = lo; i < hi; ++i) batch.push_back(&examples[order[i]]);
        AccessMask mask;
        if (masked) {
            auto rng = CounterRng::for_stream(config.seed ^ kMaskTag, step);
            mask = draw_shell_mask(model.geometry(), rng);
        }
        double loss = std::numeric_limits<double>::quiet_NaN();
        std::string failure;
        try {
            loss = model.loss_and_grad(batch, mask, grad);
        } catch (const NumericalError& e) {
            failure = e.what();
        }
        if (failure.empty() && (!std::isfinite(loss) || !all_finite(grad)))
            failure = "non-finite loss or gradient";
        if (!failure.empty()) {
            model.params().data() = last_good;
            result.aborted = true;
            result.diagnostic = "training aborted at step " + std::to_string(step) + ": " + failure +
                                "; parameters restored to step " +
                                std::to_string(result.curve.empty() ? 0 : result.curve.back().step);
            result.steps = step;
            return result;
        }
        if (config.cosine_decay)
            adam.set_lr(config.adam.lr * 0.5 *
                        (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps))));
        adam.step(model.params().data(), grad);
        loss_sum += loss;
        ++loss_count;
        if (next_mark < marks.size() && marks[next_mark] == step + 1) {
            record_point(step + 1);
            ++next_mark;
        }
    }
    result.steps = total_steps;
    return result;
}

struct RestartResult {
    std::unique_ptr<LearnedModel> model;
    TrainResult result;
    std::size_t chosen = 0;
    std::vector<double> final_entropy; // per candidate; NaN if it aborted
};

/*!
 * Trains `restarts` independent candidates and keeps the one whose final
 * held-out entropy bound is lowest. Candidate k is built by make(k) and
 * trained with seed config.seed + k. Aborted candidates are chosen only if
 * every candidate aborts.
 *
 * Attention models on the chain can stall for many epochs on a plateau
 * that explains one parity of m but not the other; which seeds stall is
 * unpredictable, so independent restarts are cheaper than longer runs.
 */
inline RestartResult train_best_of(const std::function<std::unique_ptr<LearnedModel>(std::size_t)>& make,
                                   std::span<const OutcomeRecord> train_records,
                                   std::span<const OutcomeRecord> validation, const TrainConfig& config,
                                   std::size_t restarts,
                                   const std::function<void(std::size_t, const CurvePoint&)>& on_point = {}) {
    require(restarts >= 1, "restarts must be at least 1");
    RestartResult best;
    double best_score = std::numeric_limits<double>::infinity();
    bool best_aborted = true;
    for (std::size_t k = 0; k < restarts; ++k) {
        auto model = make(k);
        TrainConfig c = config;
        c.seed = config.seed + k;
        auto res = train(*model, train_records, validation, c, [&](const CurvePoint& p) {
            if (on_point) on_point(k, p);
        });
        const double score = res.aborted || res.curve.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                              : res.curve.back().entropy.mean;
        best.final_entropy.push_back(score);
        // Any finished candidate beats an aborted one; ties keep the earlier.
        const bool better = !best.model || (best_aborted && !res.aborted) ||
                            (!res.aborted && score < best_score);
        if (better) {
            best.model = std::move(model);
            best.result = std::move(res);
            best.chosen = k;
            best_aborted = best.result.aborted;
            best_score = best_aborted ? std::numeric_limits<double>::infinity() : score;
        }
    }
    return best;
}

} // namespace mie::learn
