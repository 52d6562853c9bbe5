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
 * Flat parameter storage shared by the learned models, the optimizer and
 * the checkpoint format.
 *
 * Every tensor lives in one contiguous 64-byte aligned ParamVector. A complex
 * tensor of n elements occupies 2n doubles (re, im interleaved), which is
 * the layout of std::complex<double>[n]. Gradients use the same layout:
 * for complex tensors the pair holds (df/dRe, df/dIm).
 *
 * The fixed alignment makes training bitwise reproducible: Eigen peels
 * vectorized reductions by the address of the data, so buffers at varying
 * heap alignments would sum in different orders.
 */

#include <complex>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mie/core.hpp"
#include "mie/rng.hpp"

namespace mie::learn {

template <class T>
struct CacheAligned {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    CacheAligned() = default;
    template <class U>
    CacheAligned(const CacheAligned<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

    template <class U>
    bool operator==(const CacheAligned<U>&) const noexcept { return true; }
};

using ParamVector = std::vector<double, CacheAligned<double>>;

struct TensorSpec {
    std::string name;
    std::vector<std::size_t> shape;
    bool complex = false;
    std::size_t offset = 0; // in doubles

    std::size_t elements() const {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    }
    std::size_t doubles() const { return elements() * (complex ? 2 : 1); }

    bool operator==(const TensorSpec&) const = default;
};

class ParamStore {
  public:
    std::size_t add(std::string name, std::vector<std::size_t> shape, bool complex = false) {
        for (const auto& t : tensors_) require(t.name != name, "duplicate tensor name '" + name + "'");
        TensorSpec t{std::move(name), std::move(shape), complex, data_.size()};
        data_.resize(data_.size() + t.doubles(), 0.0);
        tensors_.push_back(std::move(t));
        return tensors_.size() - 1;
    }

    std::size_t size() const { return data_.size(); }
    ParamVector& data() { return data_; }
    const ParamVector& data() const { return data_; }
    const std::vector<TensorSpec>& tensors() const { return tensors_; }
    const TensorSpec& spec(std::size_t i) const { return tensors_.at(i); }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < tensors_.size(); ++i)
            if (tensors_[i].name == name) return i;
        throw ContractViolation("no tensor named '" + name + "'");
    }

    double* real(std::size_t i) { return data_.data() + tensors_.at(i).offset; }
    const double* real(std::size_t i) const { return data_.data() + tensors_.at(i).offset; }

    cplx* complex(std::size_t i) {
        require(tensors_.at(i).complex, "tensor is not complex");
        return reinterpret_cast<cplx*>(real(i));
    }
    const cplx* complex(std::size_t i) const {
        require(tensors_.at(i).complex, "tensor is not complex");
        return reinterpret_cast<const cplx*>(real(i));
    }

    ParamVector zeros_like() const { return ParamVector(data_.size(), 0.0); }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    void fill_normal(std::size_t i, double scale, CounterRng& rng) {
        double* p = real(i);
        for (std::size_t k = 0; k < tensors_.at(i).doubles(); ++k) p[k] = scale * rng.normal();
    }

    void fill(std::size_t i, double value) {
        double* p = real(i);
        for (std::size_t k = 0; k < tensors_.at(i).doubles(); ++k) p[k] = value;
    }

    bool same_layout(const ParamStore& other) const { return tensors_ == other.tensors_; }

  private:
    std::vector<TensorSpec> tensors_;
    ParamVector data_;
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace mie::learn
