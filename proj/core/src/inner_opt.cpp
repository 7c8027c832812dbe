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

#include "persopt/inner_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "persopt/design.hpp"

namespace persopt::opt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_inf(double v) {
    return std::isfinite(v) ? v : kInf;
}

}  // namespace

SearchSpec SearchSpec::over(Box box, std::uint64_t seed) {
    SearchSpec spec;
    spec.box = std::move(box);
    spec.seed = seed;
    return spec;
}

int SearchSpec::candidate_count() const {
    return candidates > 0 ? candidates : 128 * static_cast<int>(box.dim());
}

void SearchSpec::validate() const {
    box.validate();
    if (candidates < 0 || polish_top_k < 0 || max_iterations < 0) {
        throw ConfigError("search counts must be nonnegative");
    }
    if (!(x_tolerance > 0.0) || !(f_tolerance > 0.0)) {
        throw ConfigError("search tolerances must be positive");
    }
    for (const Vector& x : extra_starts) {
        if (x.size() != box.dim()) {
            throw DimensionError("extra start has the wrong dimension");
        }
    }
}

Matrix candidate_set(const SearchSpec& spec) {
    const Index dim = spec.box.dim();
    const Index extra = static_cast<Index>(spec.extra_starts.size());
    const Index count = spec.candidate_count();
    Matrix out(extra + count, dim);
    for (Index i = 0; i < extra; ++i) {
        out.row(i) = spec.box.clamp(spec.extra_starts[static_cast<std::size_t>(i)]).transpose();
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector shift(dim);
    for (Index j = 0; j < dim; ++j) {
        shift[j] = unif(rng);
    }
    design::SobolStream stream(static_cast<int>(dim));
    for (Index i = 0; i < count; ++i) {
        Vector u = stream.next() + shift;
        for (Index j = 0; j < dim; ++j) {
            u[j] -= std::floor(u[j]);
        }
        out.row(extra + i) = spec.box.from_unit(u).transpose();
    }
    return out;
}

OptResult nelder_mead(const Objective& objective, const Box& box, const Vector& start,
                      double start_value, const SimplexOptions& options) {
    std::vector<Index> free;
    for (Index j = 0; j < box.dim(); ++j) {
        if (box.upper[j] > box.lower[j]) {
            free.push_back(j);
        }
    }
    OptResult result{box.clamp(start), finite_or_inf(start_value), 0};
    const auto nfree = static_cast<Index>(free.size());
    if (nfree == 0 || options.max_iterations == 0) {
        return result;
    }

    const Vector width = box.width();
    auto embed = [&](const Vector& z) {
        Vector x = result.x;
        for (Index k = 0; k < nfree; ++k) {
            x[free[k]] = z[k];
        }
        return box.clamp(x);
    };
    auto project = [&](const Vector& z) {
        Vector out = z;
        for (Index k = 0; k < nfree; ++k) {
            out[k] = std::clamp(z[k], box.lower[free[k]], box.upper[free[k]]);
        }
        return out;
    };
    auto eval = [&](const Vector& z) {
        ++result.evaluations;
        return finite_or_inf(objective(embed(z)));
    };

    std::vector<Vector> simplex(static_cast<std::size_t>(nfree + 1), Vector(nfree));
    std::vector<double> values(static_cast<std::size_t>(nfree + 1));
    for (Index k = 0; k < nfree; ++k) {
        simplex[0][k] = result.x[free[k]];
    }
    values[0] = result.value;
    for (Index k = 0; k < nfree; ++k) {
        Vector z = simplex[0];
        const double step = options.relative_step * width[free[k]];
        z[k] += (z[k] + step <= box.upper[free[k]]) ? step : -step;
        simplex[static_cast<std::size_t>(k + 1)] = project(z);
        values[static_cast<std::size_t>(k + 1)] = eval(simplex[static_cast<std::size_t>(k + 1)]);
    }

    std::vector<std::size_t> order(simplex.size());
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        double spread = 0.0;
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            for (Index k = 0; k < nfree; ++k) {
                spread = std::max(spread, std::abs(simplex[i][k] - simplex[best][k]) / width[free[k]]);
            }
        }
        const double fspread = values[worst] - values[best];
        if (spread <= options.x_tolerance ||
            (std::isfinite(fspread) && fspread <= options.f_tolerance * (1.0 + std::abs(values[best])))) {
            break;
        }

        Vector centroid = Vector::Zero(nfree);
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != worst) {
                centroid += simplex[i];
            }
        }
        centroid /= static_cast<double>(nfree);

        const Vector reflected = project(centroid + (centroid - simplex[worst]));
        const double f_reflected = eval(reflected);
        if (f_reflected < values[best]) {
            const Vector expanded = project(centroid + 2.0 * (centroid - simplex[worst]));
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const Vector contracted = outside ? project(centroid + 0.5 * (reflected - centroid))
                                          : project(centroid + 0.5 * (simplex[worst] - centroid));
        const double f_contracted = eval(contracted);
        if (f_contracted < (outside ? f_reflected : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != best) {
                simplex[i] = project(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
                values[i] = eval(simplex[i]);
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
        if (values[i] < values[best]) {
            best = i;
        }
    }
    if (values[best] < result.value) {
        result.x = embed(simplex[best]);
        result.value = values[best];
    }
    return result;
}

OptResult minimize(const Objective& objective, const SearchSpec& spec) {
    spec.validate();
    const Matrix candidates = candidate_set(spec);
    const Index count = candidates.rows();

    std::vector<double> values(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        values[static_cast<std::size_t>(i)] = finite_or_inf(objective(candidates.row(i).transpose()));
    }
    std::vector<Index> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
    });
    if (!std::isfinite(values[static_cast<std::size_t>(order.front())])) {
        throw NoFiniteValueError("objective was non-finite on every candidate");
    }

    OptResult best{candidates.row(order.front()).transpose(), values[static_cast<std::size_t>(order.front())],
                   static_cast<int>(count)};

    SimplexOptions simplex;
    simplex.max_iterations = spec.max_iterations;
    simplex.x_tolerance = spec.x_tolerance;
    simplex.f_tolerance = spec.f_tolerance;
    simplex.relative_step =
        0.5 / std::pow(static_cast<double>(spec.candidate_count()), 1.0 / static_cast<double>(spec.box.dim()));

    const auto polish = std::min<Index>(spec.polish_top_k, count);
    for (Index r = 0; r < polish; ++r) {
        const Index i = order[static_cast<std::size_t>(r)];
        const double v = values[static_cast<std::size_t>(i)];
        if (!std::isfinite(v)) {
            break;
        }
        const OptResult local = nelder_mead(objective, spec.box, candidates.row(i).transpose(), v, simplex);
        best.evaluations += local.evaluations;
        if (local.value < best.value) {
            best.x = local.x;
            best.value = local.value;
        }
    }
    return best;
}

OptResult maximize(const Objective& objective, const SearchSpec& spec) {
    OptResult r = minimize([&objective](const Vector& x) { return -objective(x); }, spec);
    r.value = -r.value;
    return r;
}

}  // namespace persopt::opt
