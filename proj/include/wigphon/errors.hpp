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
/// Exception hierarchy shared by all library components.

#include <stdexcept>
#include <string>

namespace wigphon {

/// Base class of every error thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}

    /// Stable machine-readable tag, used by the CLI error reports.
    virtual const char* tag() const noexcept { return "error"; }
};

#define WIGPHON_DEFINE_ERROR(NAME)                                          \
    class NAME : public error {                                             \
    public:                                                                 \
        explicit NAME(const std::string& msg) : error(msg) {}               \
        const char* tag() const noexcept override { return #NAME; }         \
    }

// Evaluation outside a function's mathematical domain (e.g. occupancy at
// non-positive argument).
WIGPHON_DEFINE_ERROR(domain_error);
// Debye symbols are non-smooth at q = 0; derivatives below the momentum
// cutoff are rejected.
WIGPHON_DEFINE_ERROR(degenerate_momentum);
// Angular moments are implemented for ranks 2 and 4 only (odd ranks vanish
// identically by parity).
WIGPHON_DEFINE_ERROR(unsupported_rank);
WIGPHON_DEFINE_ERROR(unsupported_dimension);
// The requested integral has a non-integrable endpoint for the given
// parameters (detected analytically, not numerically).
WIGPHON_DEFINE_ERROR(divergent_integral);
WIGPHON_DEFINE_ERROR(tolerance_not_reached);
// The maximum-entropy exponent xi must stay positive over the whole
// integration domain.
WIGPHON_DEFINE_ERROR(non_positive_exponent);
WIGPHON_DEFINE_ERROR(no_convergence);
WIGPHON_DEFINE_ERROR(outside_realizable_set);
WIGPHON_DEFINE_ERROR(no_bracket);
WIGPHON_DEFINE_ERROR(grid_mismatch);
WIGPHON_DEFINE_ERROR(non_periodic_domain);
WIGPHON_DEFINE_ERROR(grid_too_small);
WIGPHON_DEFINE_ERROR(stability_violation);
WIGPHON_DEFINE_ERROR(inversion_failure);
WIGPHON_DEFINE_ERROR(complex_eigenvalues);

#undef WIGPHON_DEFINE_ERROR

} // namespace wigphon
