// Copyright 2026 The wigphon project developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied. See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

/// @file
///
/// Bose-Einstein occupancy and its first three derivatives, written in terms
/// of t = exp(-x) so they stay accurate for both small and large arguments.

#include <cmath>

#include "errors.hpp"

namespace wigphon {

/// Bose-Einstein occupation number 1/(e^x - 1) for x > 0.
inline double occupancy(double x) {
    if (!(x > 0.0))
        throw domain_error("occupancy: argument must be > 0");
    return 1.0 / std::expm1(x);
}

/// d/dx occupancy = -e^x/(e^x - 1)^2, negative for all x > 0.
inline double occupancy_d1(double x) {
    if (!(x > 0.0))
        throw domain_error("occupancy_d1: argument must be > 0");
    const double t = std::exp(-x);
    const double em = -std::expm1(-x); // 1 - e^-x
    return -t / (em * em);
}

/// d^2/dx^2 occupancy = e^x(e^x + 1)/(e^x - 1)^3.
inline double occupancy_d2(double x) {
    if (!(x > 0.0))
        throw domain_error("occupancy_d2: argument must be > 0");
    const double t = std::exp(-x);
    const double em = -std::expm1(-x);
    return t * (1.0 + t) / (em * em * em);
}

/// d^3/dx^3 occupancy = -e^x(e^{2x} + 4e^x + 1)/(e^x - 1)^4.
inline double occupancy_d3(double x) {
    if (!(x > 0.0))
        throw domain_error("occupancy_d3: argument must be > 0");
    const double t = std::exp(-x);
    const double em = -std::expm1(-x);
    const double em2 = em * em;
    return -t * (1.0 + t * (4.0 + t)) / (em2 * em2);
}

} // namespace wigphon
