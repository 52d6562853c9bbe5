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
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mie/core.hpp"

namespace mie {

/*!
 * Small dense statevector with a growable/shrinkable qubit register.
 *
 * Qubit k is bit k of the amplitude index. Qubits carry an integer label
 * (the lattice site they represent) so that callers can add and remove
 * qubits without tracking index shifts themselves.
 */
class StateVector {
  public:
    StateVector() : amps_(1, cplx(1.0)) {}

    std::size_t num_qubits() const { return labels_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    const std::vector<int>& labels() const { return labels_; }

    int position(int label) const {
        const auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) throw ContractViolation("qubit label not in register");
        return static_cast<int>(it - labels_.begin());
    }

    // Append a qubit in |+> as the new highest bit.
    void add_plus(int label) {
        const std::size_t n = amps_.size();
        const double r = 1.0 / std::sqrt(2.0);
        amps_.resize(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            amps_[i] *= r;
            amps_[n + i] = amps_[i];
        }
        labels_.push_back(label);
    }

    void apply_1q(int label, const Mat2& u) {
        const std::size_t stride = std::size_t{1} << position(label);
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride)
            for (std::size_t i = base; i < base + stride; ++i) {
                const cplx a0 = amps_[i];
                const cplx a1 = amps_[i + stride];
                amps_[i] = u(0, 0) * a0 + u(0, 1) * a1;
                amps_[i + stride] = u(1, 0) * a0 + u(1, 1) * a1;
            }
    }

    // Multiply amplitude |..b_j..b_k..> by phase[2 b_j + b_k].
    void apply_diag_2q(int label_j, int label_k, const std::array<cplx, 4>& phase) {
        const int pj = position(label_j);
        const int pk = position(label_k);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            const int bj = static_cast<int>((i >> pj) & 1U);
            const int bk = static_cast<int>((i >> pk) & 1U);
            amps_[i] *= phase[2 * bj + bk];
        }
    }

    void apply_cz(int label_j, int label_k) { apply_diag_2q(label_j, label_k, {1.0, 1.0, 1.0, -1.0}); }

    // Squared norm of the branch where qubit `label` reads `bit`.
    double branch_norm2(int label, int bit) const {
        const std::size_t mask = std::size_t{1} << position(label);
        double s = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if (((i & mask) != 0) == (bit != 0)) s += std::norm(amps_[i]);
        return s;
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

    // Zero the branch where qubit `label` reads !bit (no renormalization,
    // the qubit stays in the register).
    void zero_other_branch(int label, int bit) {
        const std::size_t mask = std::size_t{1} << position(label);
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if (((i & mask) != 0) != (bit != 0)) amps_[i] = 0.0;
    }

    // Project qubit `label` onto `bit`, drop it from the register and
    // rescale by 1/sqrt(weight). Returns the branch weight relative to the
    // current norm (the conditional probability for a normalized state).
    double project_out(int label, int bit) {
        const int p = position(label);
        const std::size_t stride = std::size_t{1} << p;
        std::vector<cplx> next(amps_.size() / 2);
        double w = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) {
            const std::size_t low = j & (stride - 1);
            const std::size_t high = (j >> p) << (p + 1);
            const cplx a = amps_[high | low | (bit ? stride : 0)];
            next[j] = a;
            w += std::norm(a);
        }
        const double total = norm2();
        amps_ = std::move(next);
        labels_.erase(labels_.begin() + p);
        if (w > 0.0) {
            const double s = 1.0 / std::sqrt(w);
            for (auto& a : amps_) a *= s;
        }
        return total > 0.0 ? w / total : 0.0;
    }

  private:
    std::vector<cplx> amps_;
    std::vector<int> labels_;
};

} // namespace mie
