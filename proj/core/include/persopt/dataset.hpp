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

#ifndef PERSOPT_DATASET_HPP
#define PERSOPT_DATASET_HPP

#include "persopt/common.hpp"

namespace persopt {

// Two points closer than this (max-norm, in box-width units) count as the same run.
inline constexpr double kDuplicateTolerance = 1e-8;

// Scaled max-norm distance used for duplicate detection.
double scaled_distance(const Box& box, const Vector& a, const Vector& b);

// Experiment state: design points x_i = (s_i', t_i')' (one per row) and their
// responses. Points are kept inside the domain box and pairwise distinct.
class Dataset {
public:
    explicit Dataset(Domain domain);
    Dataset(Domain domain, Matrix points, Vector responses);

    // Throws DomainError for points outside the box and DuplicatePointError
    // for points within kDuplicateTolerance of an existing run.
    void add(const Vector& x, double y);
    void add(const Vector& s, const Vector& t, double y) { add(domain_.join(s, t), y); }

    [[nodiscard]] bool is_duplicate(const Vector& x) const;

    [[nodiscard]] Index n() const { return points_.rows(); }
    [[nodiscard]] Index d() const { return domain_.d(); }
    [[nodiscard]] const Matrix& points() const { return points_; }
    [[nodiscard]] const Vector& responses() const { return responses_; }
    [[nodiscard]] const Domain& domain() const { return domain_; }
    [[nodiscard]] Matrix environment_points() const { return points_.rightCols(domain_.q()); }

    // Checks the fit precondition n >= 2 on top of the per-point invariants.
    void require_fittable() const;

private:
    Domain domain_;
    Matrix points_;
    Vector responses_;
};

}  // namespace persopt

#endif  // PERSOPT_DATASET_HPP
