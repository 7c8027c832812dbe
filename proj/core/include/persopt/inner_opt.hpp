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

#ifndef PERSOPT_INNER_OPT_HPP
#define PERSOPT_INNER_OPT_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "persopt/common.hpp"

namespace persopt::opt {

using Objective = std::function<double(const Vector&)>;

class NoFiniteValueError : public Error {
public:
    using Error::Error;
};

// Multistart search settings. `candidates == 0` means 128 per box dimension.
struct SearchSpec {
    Box box;
    int candidates = 0;
    int polish_top_k = 4;
    int max_iterations = 200;
    double x_tolerance = 1e-6;
    double f_tolerance = 1e-14;
    std::uint64_t seed = 0;
    // Evaluated ahead of the space-filling candidates (e.g. warm starts).
    std::vector<Vector> extra_starts;

    static SearchSpec over(Box box, std::uint64_t seed = 0);

    [[nodiscard]] int candidate_count() const;
    void validate() const;
};

struct OptResult {
    Vector x;
    double value = 0.0;
    int evaluations = 0;
};

// Seeded space-filling candidate set for `spec`, one point per row: the extra
// starts followed by a randomly shifted Sobol' point set.
Matrix candidate_set(const SearchSpec& spec);

// Evaluates the candidate set, polishes the best `polish_top_k` with a box-
// projected Nelder-Mead search and returns the best point found. Ties go to
// the lowest candidate index. Non-finite objective values rank last; throws
// NoFiniteValueError when every candidate is non-finite.
OptResult minimize(const Objective& objective, const SearchSpec& spec);

// minimize() applied to the negated objective.
OptResult maximize(const Objective& objective, const SearchSpec& spec);

struct SimplexOptions {
    int max_iterations = 200;
    double x_tolerance = 1e-6;
    double f_tolerance = 1e-14;
    // Initial edge length per coordinate; scaled by the box width.
    double relative_step = 0.05;
};

// Local Nelder-Mead descent from `start` with coordinate clamping into `box`.
// Coordinates with zero width stay fixed. Never returns a value above
// `start_value`.
OptResult nelder_mead(const Objective& objective, const Box& box, const Vector& start,
                      double start_value, const SimplexOptions& options);

}  // namespace persopt::opt

#endif  // PERSOPT_INNER_OPT_HPP
