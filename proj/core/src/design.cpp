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

#include "persopt/design.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "persopt/inner_opt.hpp"

namespace persopt::design {
namespace {

struct PrimitivePolynomial {
    int degree;
    unsigned coefficients;  // interior coefficients, highest first
    std::array<std::uint32_t, 8> initial;
};

// Joe & Kuo (new-joe-kuo-6.21201), dimensions 1..32. Dimension 1 is the
// van der Corput sequence and uses all-one initial numbers.
constexpr std::array<PrimitivePolynomial, SobolStream::kMaxDimension> kPolynomials{{
    {0, 0, {1}},
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
}};

using DirectionTable = std::array<std::array<std::uint32_t, SobolStream::kBits>, SobolStream::kMaxDimension>;

DirectionTable make_direction_table() {
    constexpr int bits = SobolStream::kBits;
    DirectionTable table{};
    for (int k = 0; k < bits; ++k) {
        table[0][k] = std::uint32_t{1} << (bits - 1 - k);
    }
    for (int j = 1; j < SobolStream::kMaxDimension; ++j) {
        const auto& poly = kPolynomials[j];
        auto& v = table[j];
        const int s = poly.degree;
        for (int k = 0; k < s; ++k) {
            v[k] = poly.initial[k] << (bits - 1 - k);
        }
        for (int k = s; k < bits; ++k) {
            v[k] = v[k - s] ^ (v[k - s] >> s);
            for (int l = 1; l < s; ++l) {
                if ((poly.coefficients >> (s - 1 - l)) & 1U) {
                    v[k] ^= v[k - l];
                }
            }
        }
    }
    return table;
}

const DirectionTable& directions() {
    static const DirectionTable table = make_direction_table();
    return table;
}

constexpr double kTwoToMinus32 = 1.0 / 4294967296.0;

}  // namespace

SobolStream::SobolStream(int dimension, std::uint64_t start_index) : dimension_(dimension) {
    if (dimension < 1 || dimension > kMaxDimension) {
        throw DimensionError("Sobol' dimension must be in [1, " + std::to_string(kMaxDimension) +
                             "], got " + std::to_string(dimension));
    }
    seek(start_index);
}

void SobolStream::seek(std::uint64_t index) {
    if (index < 1 || index >= (std::uint64_t{1} << kBits)) {
        throw DimensionError("Sobol' index out of range");
    }
    index_ = index - 1;
    const std::uint64_t gray = index_ ^ (index_ >> 1);
    const auto& v = directions();
    for (int j = 0; j < dimension_; ++j) {
        std::uint32_t x = 0;
        for (int k = 0; k < kBits; ++k) {
            if ((gray >> k) & 1U) {
                x ^= v[j][k];
            }
        }
        state_[j] = x;
    }
}

Vector SobolStream::next() {
    if (index_ + 1 >= (std::uint64_t{1} << kBits)) {
        throw DimensionError("Sobol' stream exhausted");
    }
    const int c = std::countr_one(index_);
    const auto& v = directions();
    Vector point(dimension_);
    for (int j = 0; j < dimension_; ++j) {
        state_[j] ^= v[j][c];
        point[j] = static_cast<double>(state_[j]) * kTwoToMinus32;
    }
    ++index_;
    return point;
}

Matrix sobol_points(const Box& box, Index count, std::uint64_t start_index) {
    SobolStream stream(static_cast<int>(box.dim()), start_index);
    Matrix out(count, box.dim());
    for (Index i = 0; i < count; ++i) {
        out.row(i) = stream.next(box).transpose();
    }
    return out;
}

double min_distance(const Vector& x, const Matrix& set) {
    if (set.rows() == 0) {
        throw DimensionError("min_distance needs a nonempty point set");
    }
    if (set.cols() != x.size()) {
        throw DimensionError("min_distance dimension mismatch");
    }
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < set.rows(); ++i) {
        best = std::min(best, (set.row(i).transpose() - x).squaredNorm());
    }
    return std::sqrt(best);
}

MaximinResult maximin_next(const Matrix& set, const Box& box, const MaximinOptions& options) {
    box.validate();
    if (set.cols() != box.dim()) {
        throw DimensionError("maximin_next dimension mismatch");
    }
    const Index dim = box.dim();
    const Index count = static_cast<Index>(options.candidates_per_dim) * dim;
    // Interior Sobol' points, then points on every face (the maximizer often
    // sits on the boundary), then the corners.
    const Index per_face = dim > 1 ? static_cast<Index>(options.face_candidates) : 0;
    const Index corners = Index{1} << dim;
    Matrix candidates(count + 2 * dim * per_face + corners, dim);
    candidates.topRows(count) = sobol_points(box, count);
    Index row = count;
    if (per_face > 0) {
        const Matrix face_unit = sobol_points(Box::unit(dim - 1), per_face);
        for (Index j = 0; j < dim; ++j) {
            for (int side = 0; side < 2; ++side) {
                for (Index k = 0; k < per_face; ++k) {
                    Vector u(dim);
                    u.head(j) = face_unit.row(k).head(j).transpose();
                    u[j] = side;
                    u.tail(dim - j - 1) = face_unit.row(k).tail(dim - j - 1).transpose();
                    candidates.row(row++) = box.from_unit(u).transpose();
                }
            }
        }
    }
    candidates.bottomRows(corners) = box.corners();

    Vector values(candidates.rows());
    for (Index i = 0; i < candidates.rows(); ++i) {
        values[i] = min_distance(candidates.row(i).transpose(), set);
    }
    std::vector<Index> order(static_cast<std::size_t>(candidates.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] > values[b]; });

    MaximinResult best{candidates.row(order[0]).transpose(), values[order[0]]};
    opt::SimplexOptions simplex;
    simplex.max_iterations = options.polish_iterations;
    simplex.x_tolerance = options.x_tolerance;
    simplex.relative_step = 0.5 / std::pow(static_cast<double>(count), 1.0 / static_cast<double>(dim));
    const auto negated = [&set](const Vector& x) { return -min_distance(x, set); };
    const std::size_t top = std::min(order.size(), static_cast<std::size_t>(std::max(1, options.polish_top_k)));
    for (std::size_t r = 0; r < top; ++r) {
        const Index i = order[r];
        const opt::OptResult polished =
            opt::nelder_mead(negated, box, candidates.row(i).transpose(), -values[i], simplex);
        if (-polished.value > best.distance) {
            best = {polished.x, -polished.value};
        }
    }
    return best;
}

}  // namespace persopt::design
