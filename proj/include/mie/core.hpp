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

/* Shared scalar/matrix aliases and the error hierarchy. */

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mie {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;

// Outcome bits: 0 encodes the +1 eigenvalue, 1 encodes -1.
using Bits = std::vector<std::uint8_t>;

// A caller broke a documented precondition (bad shape, bad config).
class ContractViolation : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Eigensolver failure, degenerate normalization, impossible projection.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed or incompatible files.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

inline double log2_safe(double x, double floor) { return std::log2(x > floor ? x : floor); }

} // namespace mie
