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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "mie/parallel.hpp"
#include "mie/rng.hpp"

namespace mie {
namespace {

TEST(CounterRng, SameKeyGivesSameSequence) {
    CounterRng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(CounterRng, StreamsDependOnlyOnMasterAndIndex) {
    auto x = CounterRng::for_stream(7, 3);
    auto y = CounterRng::for_stream(7, 3);
    EXPECT_EQ(x.key(), y.key());
    EXPECT_EQ(x(), y());
    std::set<std::uint64_t> keys;
    for (std::uint64_t m = 0; m < 20; ++m)
        for (std::uint64_t s = 0; s < 20; ++s) keys.insert(CounterRng::stream_key(m, s));
    EXPECT_EQ(keys.size(), 400u);
}

TEST(CounterRng, SplitDoesNotAdvanceParent) {
    CounterRng a(5), b(5);
    (void)a.split(1);
    EXPECT_EQ(a.counter(), 0u);
    EXPECT_EQ(a(), b());
}

TEST(CounterRng, UniformMomentsMatch) {
    CounterRng r(11);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    EXPECT_NEAR(s / n, 0.5, 5 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(s2 / n, 1.0 / 3.0, 0.005);
}

TEST(CounterRng, IndexIsUniformByChiSquare) {
    CounterRng r(12);
    const int k = 3, n = 90000;
    std::vector<int> c(k, 0);
    for (int i = 0; i < n; ++i) ++c[r.index(k)];
    double chi2 = 0.0;
    for (int x : c) chi2 += std::pow(x - n / double(k), 2) / (n / double(k));
    EXPECT_LT(chi2, 13.8); // 99.9% quantile, 2 dof
}

TEST(CounterRng, NormalMoments) {
    CounterRng r(13);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.015);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(CounterRng, BernoulliRate) {
    CounterRng r(14);
    int hits = 0;
    for (int i = 0; i < 100000; ++i) hits += r.bernoulli(0.3);
    EXPECT_NEAR(hits / 1e5, 0.3, 0.006);
}

TEST(Shuffle, ProducesPermutationDeterministically) {
    std::vector<int> a(100), b(100);
    std::iota(a.begin(), a.end(), 0);
    b = a;
    CounterRng r1(3), r2(3);
    shuffle(a.begin(), a.end(), r1);
    shuffle(b.begin(), b.end(), r2);
    EXPECT_EQ(a, b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
    EXPECT_FALSE(std::is_sorted(a.begin(), a.end()));
}

TEST(ParallelFor, VisitsEachIndexOnceAndRethrows) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

} // namespace
} // namespace mie
