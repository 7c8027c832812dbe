// Copyright 2026 The persopt Authors. All Rights Reserved.
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
// =============================================================================

#ifndef PERSOPT_TESTS_SUPPORT_HPP
#define PERSOPT_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "oracle/dense_kriging.hpp"
#include "persopt/dataset.hpp"
#include "persopt/gp.hpp"

namespace persopt::testing {

inline Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values) {
        v[i++] = x;
    }
    return v;
}

// n random points in the unit box of `domain` with responses from a smooth
// nonlinear function, rejecting near-coincident points.
inline Dataset random_dataset(const Domain& domain, Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Dataset data(domain);
    while (data.n() < n) {
        Vector u(domain.d());
        for (Index k = 0; k < u.size(); ++k) {
            u[k] = unif(rng);
        }
        const Vector x = domain.joint().from_unit(u);
        bool close = false;
        for (Index i = 0; i < data.n(); ++i) {
            if ((data.points().row(i).transpose() - x).norm() < 0.05) {
                close = true;
            }
        }
        if (close) {
            continue;
        }
        double y = 0.0;
        for (Index k = 0; k < x.size(); ++k) {
            y += std::sin(3.0 * x[k] + 0.7 * static_cast<double>(k)) + 0.5 * x[k] * x[k];
        }
        data.add(x, y);
    }
    return data;
}

inline oracle::DenseKriging dense_oracle(const Dataset& data, const Vector& theta, double nugget,
                                         double dof = 0.0) {
    oracle::DenseKriging o;
    o.x = data.points().cast<long double>();
    o.y = data.responses().cast<long double>();
    o.theta = theta.cast<long double>();
    o.nugget = nugget;
    o.dof = dof;
    o.compute();
    return o;
}

inline double rel_err(double got, long double want) {
    return std::abs(static_cast<long double>(got) - want) / std::max(1.0L, std::abs(want));
}

}  // namespace persopt::testing

#endif  // PERSOPT_TESTS_SUPPORT_HPP
