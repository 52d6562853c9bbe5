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
 * Cross-correlation bounds between classical shadows and a computational
 * model m -> rho^C_m, plus classification (binning) estimates, outcome-flip
 * sensitivity and outcome multiplicity statistics.
 *
 * Per-record terms, with S the joint shadow and C the model prediction:
 *
 *   entropy      S^SC = -Tr[S log2 C]                    (upper bound on S_m)
 *   negativity   N^SC = -Tr[S^TA Pi(C^TA)]               (lower bound on N_m)
 *   coherent     I^SC = -Tr[S_A log2 C_A] - S^SC         (lower bound on I_m)
 *
 * The same functions accept the true rho_m in place of S, which gives the
 * population values S^QC, N^QC, I^QC. Discarded records never contribute.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mie/cluster_sim.hpp"
#include "mie/core.hpp"
#include "mie/parallel.hpp"
#include "mie/qmat.hpp"

namespace mie {

struct EstimateWithError {
    double mean = 0.0;
    double sem = 0.0;
    std::size_t n = 0;
};

// Mean and sample-stddev / sqrt(n) in index order.
inline EstimateWithError summarize(std::span<const double> values) {
    require(!values.empty(), "cannot summarize an empty set of values");
    const auto n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    if (n == 1) return {mean, 0.0, 1};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)), n};
}

class ComputationalModel {
  public:
    virtual ~ComputationalModel() = default;
    virtual Mat4 predict(std::span<const std::uint8_t> m) const = 0;
    virtual std::string kind() const = 0;

    // Predictions for many strings; models with batched kernels override.
    virtual std::vector<Mat4> predict_many(const std::vector<Bits>& ms, unsigned workers = 1) const {
        std::vector<Mat4> out(ms.size());
        parallel_for(ms.size(), workers, [&](std::size_t i) { out[i] = predict(ms[i]); });
        return out;
    }
};

class ConstantModel final : public ComputationalModel {
  public:
    explicit ConstantModel(Mat4 rho = Mat4::Identity() / 4.0) : rho_(std::move(rho)) {
        const auto why = qmat::density_violation<4>(rho_);
        require(why.empty(), "constant model is not a density matrix: " + why);
    }
    Mat4 predict(std::span<const std::uint8_t>) const override { return rho_; }
    std::string kind() const override { return "constant"; }

  private:
    Mat4 rho_;
};

// Wraps an arbitrary callable; used by tests and by composed models.
class FunctionModel final : public ComputationalModel {
  public:
    using Fn = std::function<Mat4(std::span<const std::uint8_t>)>;
    FunctionModel(Fn fn, std::string kind) : fn_(std::move(fn)), kind_(std::move(kind)) {}
    Mat4 predict(std::span<const std::uint8_t> m) const override { return fn_(m); }
    std::string kind() const override { return kind_; }

  private:
    Fn fn_;
    std::string kind_;
};

// ---------------------------------------------------------------------------
// Per-record terms
// ---------------------------------------------------------------------------

inline double entropy_term(const Mat4& shadow, const Mat4& model) { return qmat::cross_entropy<4>(shadow, model); }

inline double negativity_term(const Mat4& shadow, const Mat4& model) {
    const Mat4 proj = qmat::neg_projector<4>(qmat::partial_transpose(model));
    return -qmat::trace_product<4>(qmat::partial_transpose(shadow), proj);
}

inline double coherent_term(const Mat4& shadow, const Mat4& model) {
    const double s_a = qmat::cross_entropy<2>(qmat::trace_out_b(shadow), qmat::trace_out_b(model));
    return s_a - entropy_term(shadow, model);
}

struct BoundTerms {
    double entropy;
    double negativity;
    double coherent;
};

inline BoundTerms bound_terms(const Mat4& shadow, const Mat4& model) {
    const auto spec = qmat::spectral<4>(model);
    const double s = -qmat::trace_product<4>(shadow, qmat::matrix_log2<4>(spec));
    const Mat4 proj = qmat::neg_projector<4>(qmat::partial_transpose(model));
    const double n = -qmat::trace_product<4>(qmat::partial_transpose(shadow), proj);
    const double s_a = qmat::cross_entropy<2>(qmat::trace_out_b(shadow), qmat::trace_out_b(model));
    return {s, n, s_a - s};
}

// Exact quantities of a state, for comparison with the bounds.
inline BoundTerms exact_terms(const Mat4& rho) {
    const double s = qmat::von_neumann_entropy<4>(rho);
    return {s, qmat::negativity(rho), qmat::von_neumann_entropy<2>(qmat::trace_out_b(rho)) - s};
}

// ---------------------------------------------------------------------------
// Record-stream estimators
// ---------------------------------------------------------------------------

struct BoundsReport {
    EstimateWithError entropy;
    EstimateWithError negativity;
    EstimateWithError coherent;
};

inline std::vector<const OutcomeRecord*> kept_records(std::span<const OutcomeRecord> records) {
    std::vector<const OutcomeRecord*> out;
    out.reserve(records.size());
    for (const auto& r : records)
        if (!r.discarded) out.push_back(&r);
    return out;
}

/*!
 * All three bounds in one pass. `query` optionally rewrites the outcome
 * string fed to the model; the shadow always stays tied to the record.
 */
inline BoundsReport evaluate_bounds(std::span<const OutcomeRecord> records, const ComputationalModel& model,
                                    unsigned workers = 1,
                                    const std::function<Bits(const OutcomeRecord&)>& query = {}) {
    const auto kept = kept_records(records);
    require(!kept.empty(), "no non-discarded records to evaluate");
    std::vector<Bits> queries;
    queries.reserve(kept.size());
    for (const OutcomeRecord* r : kept) queries.push_back(query ? query(*r) : r->m);
    const auto preds = model.predict_many(queries, workers);
    std::vector<double> s(kept.size()), n(kept.size()), c(kept.size());
    parallel_for(kept.size(), workers, [&](std::size_t i) {
        const auto t = bound_terms(kept[i]->shadow().joint(), preds[i]);
        s[i] = t.entropy;
        n[i] = t.negativity;
        c[i] = t.coherent;
    });
    return {summarize(s), summarize(n), summarize(c)};
}

inline EstimateWithError entropy_bound(std::span<const OutcomeRecord> records, const ComputationalModel& model,
                                       unsigned workers = 1) {
    return evaluate_bounds(records, model, workers).entropy;
}

inline EstimateWithError negativity_bound(std::span<const OutcomeRecord> records, const ComputationalModel& model,
                                          unsigned workers = 1) {
    return evaluate_bounds(records, model, workers).negativity;
}

inline EstimateWithError coherent_info_bound(std::span<const OutcomeRecord> records,
                                             const ComputationalModel& model, unsigned workers = 1) {
    return evaluate_bounds(records, model, workers).coherent;
}

// ---------------------------------------------------------------------------
// Sensitivity to flipped outcomes
// ---------------------------------------------------------------------------

inline Bits flip_sites(const GeometryConfig& g, std::span<const std::uint8_t> m, const std::set<int>& sites) {
    Bits out(m.begin(), m.end());
    for (int site : sites) {
        require(site >= 0 && site < g.num_sites() && !g.is_probe(site),
                "flip set must contain only non-probe sites of the geometry");
        out[g.m_position(site)] ^= 1U;
    }
    return out;
}

// Negativity bound with the model queried at m with `sites` inverted.
inline EstimateWithError sensitivity_flip(std::span<const OutcomeRecord> records, const ComputationalModel& model,
                                          const std::set<int>& sites, unsigned workers = 1) {
    require(!records.empty(), "no records");
    for (const auto& r : records) require(r.geometry == records[0].geometry, "records mix geometries");
    const GeometryConfig& g = records[0].geometry;
    for (int site : sites)
        require(site >= 0 && site < g.num_sites() && !g.is_probe(site),
                "flip set must contain only non-probe sites of the geometry");
    return evaluate_bounds(records, model, workers,
                           [&](const OutcomeRecord& r) { return flip_sites(g, r.m, sites); })
        .negativity;
}

// Non-probe sites of one grid row.
inline std::set<int> grid_row_sites(const GeometryConfig& g, int row) {
    require(g.kind == Lattice::Grid && row >= 0 && row < g.L, "row out of range for grid geometry");
    std::set<int> out;
    for (int c = 0; c < g.L; ++c)
        if (!g.is_probe(row * g.L + c)) out.insert(row * g.L + c);
    return out;
}

// ---------------------------------------------------------------------------
// Multiplicity statistics
// ---------------------------------------------------------------------------

// k -> number of distinct (masked) outcome strings seen exactly k times.
// `sites` restricts m to the listed sites; empty means all of m.
inline std::map<std::size_t, std::size_t> multiplicity_histogram(std::span<const OutcomeRecord> records,
                                                                 const std::set<int>& sites = {}) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& r : records) {
        std::string key;
        if (sites.empty()) {
            key.assign(r.m.begin(), r.m.end());
        } else {
            for (int site : sites) {
                require(site >= 0 && site < r.geometry.num_sites() && !r.geometry.is_probe(site),
                        "site mask must contain only non-probe sites");
                key.push_back(static_cast<char>(r.m[r.geometry.m_position(site)]));
            }
        }
        ++counts[key];
    }
    std::map<std::size_t, std::size_t> hist;
    for (const auto& [key, k] : counts) ++hist[k];
    return hist;
}

// ---------------------------------------------------------------------------
// Classification (binning)
// ---------------------------------------------------------------------------

using Classifier = std::function<int(std::span<const std::uint8_t>)>;

inline Classifier parity_classifier() {
    return [](std::span<const std::uint8_t> m) { return chain_class(m); };
}

inline Classifier constant_classifier() {
    return [](std::span<const std::uint8_t>) { return 0; };
}

struct ClassEstimate {
    int label = 0;
    std::size_t count = 0;
    double weight = 0.0;    // count / total kept records
    double epsilon = 0.0;   // PSD repair applied to the second half
    double entropy = 0.0;   // -Tr[rho_1 log2 rho_2]
    double coherent = 0.0;  // S_A - S
    double negativity = 0.0;
};

struct BinnedReport {
    std::vector<ClassEstimate> classes;
    std::vector<int> excluded; // labels with fewer than two records
};

// Smallest depolarization making rho PSD, with 1e-9 slack; 0 if already PSD.
inline double psd_repair_epsilon(const Mat4& rho) {
    const double lmin = qmat::spectral<4>(rho).values[0];
    if (lmin >= 0.0) return 0.0;
    return std::min(1.0, -lmin / (0.25 - lmin) + 1e-9);
}

/*!
 * Splits each class into even and odd arrival order, averages the joint
 * shadows of each half into rho_1 and rho_2 and cross-correlates them.
 */
inline BinnedReport binned_estimates(std::span<const OutcomeRecord> records, const Classifier& classify,
                                     bool psd_fix = true) {
    const auto kept = kept_records(records);
    require(!kept.empty(), "no non-discarded records to classify");
    struct Acc {
        Mat4 half[2] = {Mat4::Zero(), Mat4::Zero()};
        std::size_t count = 0;
    };
    std::map<int, Acc> acc;
    for (const OutcomeRecord* r : kept) {
        Acc& a = acc[classify(r->m)];
        a.half[a.count % 2] += r->shadow().joint();
        ++a.count;
    }
    BinnedReport out;
    for (auto& [label, a] : acc) {
        if (a.count < 2) {
            out.excluded.push_back(label);
            continue;
        }
        const auto n1 = static_cast<double>((a.count + 1) / 2);
        const auto n2 = static_cast<double>(a.count / 2);
        const Mat4 rho1 = qmat::hermitize<4>(a.half[0] / n1);
        Mat4 rho2 = qmat::hermitize<4>(a.half[1] / n2);
        ClassEstimate e;
        e.label = label;
        e.count = a.count;
        e.weight = static_cast<double>(a.count) / static_cast<double>(kept.size());
        if (psd_fix) {
            e.epsilon = psd_repair_epsilon(rho2);
            rho2 = qmat::depolarize<4>(rho2, e.epsilon);
        }
        const auto t = bound_terms(rho1, rho2);
        e.entropy = t.entropy;
        e.coherent = t.coherent;
        e.negativity = t.negativity;
        out.classes.push_back(e);
    }
    return out;
}

} // namespace mie
