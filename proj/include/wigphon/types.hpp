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
/// Small fixed-size tensor types and physical-scale settings. Momentum-space
/// vectors always live in R^3; lower dimensions zero the trailing components.

#include <array>
#include <cstddef>

#include <Eigen/Dense>

#include "errors.hpp"

namespace wigphon {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Fully symmetric rank-3 tensor on R^3, stored dense.
class Tensor3 {
public:
    Tensor3() { data_.fill(0.0); }

    double& operator()(int i, int j, int k) { return data_[size_t(9 * i + 3 * j + k)]; }
    double operator()(int i, int j, int k) const { return data_[size_t(9 * i + 3 * j + k)]; }

    /// Assigns value to every permutation of (i, j, k).
    void set_sym(int i, int j, int k, double v) {
        (*this)(i, j, k) = v;
        (*this)(i, k, j) = v;
        (*this)(j, i, k) = v;
        (*this)(j, k, i) = v;
        (*this)(k, i, j) = v;
        (*this)(k, j, i) = v;
    }

    Tensor3& operator+=(const Tensor3& o) {
        for (size_t m = 0; m < data_.size(); ++m)
            data_[m] += o.data_[m];
        return *this;
    }
    Tensor3& operator*=(double s) {
        for (double& v : data_)
            v *= s;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::array<double, 27> data_;
};

/// Rank-4 tensor on R^3, stored dense.
class Tensor4 {
public:
    Tensor4() { data_.fill(0.0); }

    double& operator()(int i, int j, int k, int r) {
        return data_[size_t(27 * i + 9 * j + 3 * k + r)];
    }
    double operator()(int i, int j, int k, int r) const {
        return data_[size_t(27 * i + 9 * j + 3 * k + r)];
    }

    Tensor4& operator+=(const Tensor4& o) {
        for (size_t m = 0; m < data_.size(); ++m)
            data_[m] += o.data_[m];
        return *this;
    }
    Tensor4& operator*=(double s) {
        for (double& v : data_)
            v *= s;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::array<double, 81> data_;
};

enum class UnitSystem { nondimensional, si };

/// Global physical constants of a model setup. The default is the
/// nondimensional convention c = k_B = 1 with hbar_eff a free small
/// parameter multiplying the quantum corrections.
struct PhysicalScales {
    double hbar_eff = 0.0;
    double k_B = 1.0;
    UnitSystem units = UnitSystem::nondimensional;

    void validate() const {
        if (hbar_eff < 0.0)
            throw domain_error("PhysicalScales: hbar_eff must be >= 0");
        if (k_B <= 0.0)
            throw domain_error("PhysicalScales: k_B must be > 0");
    }
};

} // namespace wigphon
