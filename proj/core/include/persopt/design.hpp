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

#ifndef PERSOPT_DESIGN_HPP
#define PERSOPT_DESIGN_HPP

#include <array>
#include <cstdint>

#include "persopt/common.hpp"

namespace persopt::design {

// Gray-code Sobol' generator with Joe-Kuo direction numbers. The all-zero
// point (sequence index 0) is never emitted: the first call to next()
// returns sequence index 1, i.e. 0.5 in every coordinate.
class SobolStream {
public:
    static constexpr int kMaxDimension = 32;
    static constexpr int kBits = 32;

    // `start_index` is the sequence index of the first emitted point (>= 1).
    explicit SobolStream(int dimension, std::uint64_t start_index = 1);

    Vector next();
    Vector next(const Box& box) { return box.from_unit(next()); }

    // Repositions the stream so that the next emitted point has this index.
    void seek(std::uint64_t index);

    [[nodiscard]] int dimension() const { return dimension_; }
    // Sequence index of the point the next call to next() will return.
    [[nodiscard]] std::uint64_t index() const { return index_ + 1; }

private:
    int dimension_;
    std::uint64_t index_ = 0;  // index of the point held in state_
    std::array<std::uint32_t, kMaxDimension> state_{};
};

// `count` consecutive Sobol' points starting at sequence index `start_index`,
// one per row, mapped into `box`.
Matrix sobol_points(const Box& box, Index count, std::uint64_t start_index = 1);

// M(x, X): Euclidean distance from x to the nearest row of `set`.
double min_distance(const Vector& x, const Matrix& set);

struct MaximinOptions {
    int candidates_per_dim = 256;
    // Extra candidates on each face of the box (dimension >= 2).
    int face_candidates = 64;
    // Best candidates refined by the local search.
    int polish_top_k = 8;
    int polish_iterations = 200;
    double x_tolerance = 1e-9;
};

struct MaximinResult {
    Vector point;
    double distance = 0.0;
};

// Approximate argmax over `box` of M(., set). Evaluates Sobol' candidates in
// the interior and on the faces plus the box corners and polishes the best
// few; the result is never worse than any candidate.
MaximinResult maximin_next(const Matrix& set, const Box& box, const MaximinOptions& options = {});

}  // namespace persopt::design

#endif  // PERSOPT_DESIGN_HPP
