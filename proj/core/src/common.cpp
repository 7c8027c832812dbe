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

#include "persopt/common.hpp"

#include <cmath>

namespace persopt {

Box Box::unit(Index dim) {
    return Box{Vector::Zero(dim), Vector::Ones(dim)};
}

bool Box::contains(const Vector& x, double tol) const {
    if (x.size() != dim()) {
        return false;
    }
    for (Index i = 0; i < dim(); ++i) {
        const double slack = tol * std::max(1.0, upper[i] - lower[i]);
        if (!(x[i] >= lower[i] - slack && x[i] <= upper[i] + slack)) {
            return false;
        }
    }
    return true;
}

Vector Box::clamp(const Vector& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
}

Vector Box::from_unit(const Vector& u) const {
    return lower + u.cwiseProduct(width());
}

Vector Box::to_unit(const Vector& x) const {
    Vector u(dim());
    for (Index i = 0; i < dim(); ++i) {
        const double w = upper[i] - lower[i];
        u[i] = w > 0.0 ? (x[i] - lower[i]) / w : 0.0;
    }
    return u;
}

double Box::volume() const {
    return width().prod();
}

Matrix Box::corners() const {
    const Index count = Index{1} << dim();
    Matrix out(count, dim());
    for (Index c = 0; c < count; ++c) {
        for (Index i = 0; i < dim(); ++i) {
            out(c, i) = ((c >> i) & 1) ? upper[i] : lower[i];
        }
    }
    return out;
}

void Box::validate(bool allow_degenerate) const {
    if (lower.size() != upper.size()) {
        throw DimensionError("box bounds have different dimensions");
    }
    if (lower.size() == 0) {
        throw DimensionError("box must have at least one dimension");
    }
    for (Index i = 0; i < dim(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
            throw DomainError("box bounds must be finite");
        }
        if (allow_degenerate ? lower[i] > upper[i] : lower[i] >= upper[i]) {
            throw DomainError("box lower bound must be below upper bound in dim " +
                              std::to_string(i));
        }
    }
}

Domain Domain::unit(Index p, Index q) {
    return Domain{Box::unit(p), Box::unit(q)};
}

Box Domain::joint() const {
    Box box{Vector(d()), Vector(d())};
    box.lower << control.lower, environment.lower;
    box.upper << control.upper, environment.upper;
    return box;
}

Vector Domain::join(const Vector& s, const Vector& t) const {
    if (s.size() != p() || t.size() != q()) {
        throw DimensionError("(s, t) dimensions do not match the domain");
    }
    Vector x(d());
    x << s, t;
    return x;
}

void Domain::validate() const {
    control.validate(false);
    environment.validate(false);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace persopt
