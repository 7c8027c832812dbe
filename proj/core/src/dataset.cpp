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

#include "persopt/dataset.hpp"

#include <cmath>

namespace persopt {

double scaled_distance(const Box& box, const Vector& a, const Vector& b) {
    double dist = 0.0;
    for (Index i = 0; i < box.dim(); ++i) {
        const double w = box.upper[i] - box.lower[i];
        const double diff = std::abs(a[i] - b[i]);
        dist = std::max(dist, w > 0.0 ? diff / w : diff);
    }
    return dist;
}

Dataset::Dataset(Domain domain)
    : domain_(std::move(domain)), points_(0, domain_.d()), responses_(0) {
    domain_.validate();
}

Dataset::Dataset(Domain domain, Matrix points, Vector responses) : Dataset(std::move(domain)) {
    if (points.cols() != d()) {
        throw DimensionError("dataset points have " + std::to_string(points.cols()) +
                             " columns, domain has d = " + std::to_string(d()));
    }
    if (points.rows() != responses.size()) {
        throw DimensionError("dataset has different numbers of points and responses");
    }
    points_.resize(0, d());
    for (Index i = 0; i < points.rows(); ++i) {
        add(points.row(i).transpose(), responses[i]);
    }
}

bool Dataset::is_duplicate(const Vector& x) const {
    const Box box = domain_.joint();
    for (Index i = 0; i < n(); ++i) {
        if (scaled_distance(box, points_.row(i).transpose(), x) <= kDuplicateTolerance) {
            return true;
        }
    }
    return false;
}

void Dataset::add(const Vector& x, double y) {
    if (x.size() != d()) {
        throw DimensionError("point dimension does not match the domain");
    }
    if (!domain_.joint().contains(x)) {
        throw DomainError("design point lies outside the domain box");
    }
    if (!std::isfinite(y)) {
        throw DomainError("response must be finite");
    }
    if (is_duplicate(x)) {
        throw DuplicatePointError("design point duplicates an existing run");
    }
    const Index rows = n();
    points_.conservativeResize(rows + 1, Eigen::NoChange);
    points_.row(rows) = x.transpose();
    responses_.conservativeResize(rows + 1);
    responses_[rows] = y;
}

void Dataset::require_fittable() const {
    if (n() < 2) {
        throw DimensionError("at least two runs are needed to fit a surrogate");
    }
}

}  // namespace persopt
