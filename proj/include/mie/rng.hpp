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
#include <cstdint>
#include <limits>
#include <numbers>

namespace mie {

/*!
 * Counter-based, splittable 64-bit generator.
 *
 * Word i of a stream with key k is mix64(k + (i + 1) * gamma), i.e. the
 * SplitMix64 output function evaluated at an explicit counter. A stream is
 * fully described by its key, so repeat r of a run with master seed s always
 * draws from stream_key(s, r) regardless of which worker generates it or in
 * which order.
 *
 * All derived quantities (uniforms, Gaussians) are computed here rather than
 * through <random> distributions, whose output is implementation-defined.
 */
class CounterRng {
  public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

    static constexpr std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Key of sub-stream `stream` under `master`. Distinct (master, stream)
    // pairs give statistically independent streams.
    static constexpr std::uint64_t stream_key(std::uint64_t master, std::uint64_t stream) {
        return mix64(mix64(master ^ 0x6A09E667F3BCC909ULL) + mix64(stream + kGamma));
    }

    static CounterRng for_stream(std::uint64_t master, std::uint64_t stream) {
        return CounterRng(stream_key(master, stream));
    }

    // Independent child stream; does not advance this generator.
    CounterRng split(std::uint64_t child) const { return for_stream(key_, child); }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix64(key_ + (++counter_) * kGamma); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform on {0, ..., n-1}; n must be positive. Lemire's multiply-shift
    // with rejection, so the result is exactly uniform.
    std::uint64_t index(std::uint64_t n) {
        std::uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller (one variate per call, two words).
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// In-place Fisher-Yates shuffle driven by a CounterRng.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, CounterRng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = rng.index(i);
        using std::swap;
        swap(first[i - 1], first[j]);
    }
}

} // namespace mie
