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

#include "persopt/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "persopt/sha.hpp"

namespace persopt::robust {
namespace {

constexpr double kPointwiseTolerance = 1e-9;

Vector node_values(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid) {
    Vector values(grid.nodes.rows());
    for (Index k = 0; k < grid.nodes.rows(); ++k) {
        const Vector t = grid.nodes.row(k).transpose();
        values[k] = f(u(t), t);
        if (!std::isfinite(values[k])) {
            throw DomainError("cost function returned a non-finite value on the quadrature grid");
        }
    }
    return values;
}

double weighted_sum(const Vector& values, const Vector& weights) {
    double sum = 0.0;
    for (Index k = 0; k < values.size(); ++k) {
        sum += weights[k] * values[k];
    }
    return sum;
}

// Grid maximum of t -> f(u(t), t), optionally refined by local searches from
// the best few well-separated nodes (the maximum may switch between peaks).
double refined_max(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid,
                   const Vector& values, const GridSpec& spec) {
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] > values[b]; });
    double result = values[order[0]];
    if (!spec.polish_max) {
        return result;
    }
    const double spacing =
        1.0 / std::pow(static_cast<double>(grid.nodes.rows()), 1.0 / static_cast<double>(grid.environment.dim()));
    opt::SimplexOptions simplex;
    simplex.max_iterations = spec.polish_iterations;
    simplex.x_tolerance = spec.polish_x_tolerance;
    simplex.relative_step = 0.5 * spacing;
    const auto negated = [&](const Vector& t) { return -f(u(t), t); };

    std::vector<Vector> starts;
    for (Index k : order) {
        if (static_cast<int>(starts.size()) >= std::max(1, spec.polish_starts)) {
            break;
        }
        const Vector unit = grid.environment.to_unit(grid.nodes.row(k).transpose());
        bool separated = true;
        for (const Vector& other : starts) {
            if ((grid.environment.to_unit(other) - unit).lpNorm<Eigen::Infinity>() < 2.5 * spacing) {
                separated = false;
                break;
            }
        }
        if (!separated) {
            continue;
        }
        starts.push_back(grid.nodes.row(k).transpose());
        const opt::OptResult local = opt::nelder_mead(negated, grid.environment, starts.back(), -values[k], simplex);
        result = std::max(result, -local.value);
    }
    return result;
}

}  // namespace

Density uniform_density(const Box& environment) {
    const double v = environment.volume();
    return [v](const Vector&) { return 1.0 / v; };
}

QuadratureGrid make_grid(const Box& environment, const GridSpec& spec) {
    return make_grid(environment, spec, uniform_density(environment));
}

QuadratureGrid make_grid(const Box& environment, const GridSpec& spec, const Density& density) {
    environment.validate(false);
    const Index q = environment.dim();
    QuadratureGrid grid;
    grid.environment = environment;
    std::ostringstream desc;
    if (q <= spec.tensor_max_dim) {
        if (spec.points_per_dim < 1) {
            throw ConfigError("quadrature needs at least one point per dimension");
        }
        const Index per = spec.points_per_dim;
        Index count = 1;
        for (Index j = 0; j < q; ++j) {
            count *= per;
        }
        grid.nodes.resize(count, q);
        for (Index k = 0; k < count; ++k) {
            Index rest = k;
            for (Index j = 0; j < q; ++j) {
                const Index i = rest % per;
                rest /= per;
                grid.nodes(k, j) = (static_cast<double>(i) + 0.5) / static_cast<double>(per);
            }
            grid.nodes.row(k) = environment.from_unit(grid.nodes.row(k).transpose()).transpose();
        }
        desc << "midpoint " << per << "^" << q;
    } else {
        if (spec.mc_draws < 1) {
            throw ConfigError("Monte Carlo quadrature needs at least one draw");
        }
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        grid.nodes.resize(spec.mc_draws, q);
        for (Index k = 0; k < grid.nodes.rows(); ++k) {
            Vector u(q);
            for (Index j = 0; j < q; ++j) {
                u[j] = unif(rng);
            }
            grid.nodes.row(k) = environment.from_unit(u).transpose();
        }
        desc << "monte-carlo " << spec.mc_draws << " seed " << spec.seed;
    }
    const double cell = environment.volume() / static_cast<double>(grid.nodes.rows());
    grid.weights.resize(grid.nodes.rows());
    for (Index k = 0; k < grid.nodes.rows(); ++k) {
        grid.weights[k] = density(grid.nodes.row(k).transpose()) * cell;
    }
    grid.descriptor = desc.str();
    return grid;
}

PersonalizedDecision PersonalizedDecision::constant(Vector s) {
    return {Kind::kConstant, [s = std::move(s)](const Vector&) { return s; }, "constant"};
}

PersonalizedDecision PersonalizedDecision::surrogate(std::shared_ptr<const gp::GpModel> model,
                                                     opt::SearchSpec control_spec) {
    if (!model) {
        throw ConfigError("surrogate decision needs a fitted model");
    }
    control_spec.box = model->data().domain().control;
    return {Kind::kSurrogate,
            [model = std::move(model), spec = std::move(control_spec)](const Vector& t) {
                return sha::estimate_pos(*model, t, spec);
            },
            "surrogate"};
}

PersonalizedDecision PersonalizedDecision::tabulated(Matrix t_points, Matrix s_values) {
    if (t_points.rows() == 0 || t_points.rows() != s_values.rows()) {
        throw DimensionError("tabulated decision needs matching, nonempty t and s tables");
    }
    return {Kind::kTabulated,
            [t_points = std::move(t_points), s_values = std::move(s_values)](const Vector& t) {
                Index best = 0;
                double best_dist = std::numeric_limits<double>::infinity();
                for (Index k = 0; k < t_points.rows(); ++k) {
                    const double dist = (t_points.row(k).transpose() - t).squaredNorm();
                    if (dist < best_dist) {
                        best_dist = dist;
                        best = k;
                    }
                }
                return Vector(s_values.row(best).transpose());
            },
            "tabulated"};
}

PersonalizedDecision PersonalizedDecision::exact(std::function<Vector(const Vector&)> map, std::string label) {
    return {Kind::kExact, std::move(map), std::move(label)};
}

double expected_cost(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid) {
    return weighted_sum(node_values(u, f, grid), grid.weights);
}

double max_cost(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid, const GridSpec& spec) {
    return refined_max(u, f, grid, node_values(u, f, grid), spec);
}

CostEstimate evaluate_costs(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid,
                            const GridSpec& spec) {
    const Vector values = node_values(u, f, grid);
    return {weighted_sum(values, grid.weights), refined_max(u, f, grid, values, spec), grid.descriptor};
}

RobustSolution solve_u_e(const BlackBox& f, const Domain& domain, const QuadratureGrid& grid,
                         const opt::SearchSpec& control_spec) {
    opt::SearchSpec spec = control_spec;
    spec.box = domain.control;
    const opt::OptResult best = opt::minimize(
        [&](const Vector& s) {
            double sum = 0.0;
            for (Index k = 0; k < grid.nodes.rows(); ++k) {
                sum += grid.weights[k] * f(s, grid.nodes.row(k).transpose());
            }
            return sum;
        },
        spec);
    return {best.x, best.value};
}

RobustSolution solve_u_m(const BlackBox& f, const Domain& domain, const QuadratureGrid& grid,
                         const opt::SearchSpec& control_spec, const GridSpec& grid_spec) {
    opt::SearchSpec spec = control_spec;
    spec.box = domain.control;
    const opt::OptResult best = opt::minimize(
        [&](const Vector& s) { return max_cost(PersonalizedDecision::constant(s), f, grid, grid_spec); }, spec);
    return {best.x, best.value};
}

PersonalizedDecision grid_pos_oracle(const BlackBox& f, const Domain& domain, int s_points_per_dim) {
    const Box control = domain.control;
    if (control.dim() == 1) {
        const int count = std::max(2, s_points_per_dim);
        return PersonalizedDecision::exact(
            [f, control, count](const Vector& t) {
                Vector s(1);
                Vector best(1);
                double best_value = std::numeric_limits<double>::infinity();
                for (int i = 0; i < count; ++i) {
                    s[0] = control.lower[0] + control.width()[0] * static_cast<double>(i) / (count - 1);
                    const double v = f(s, t);
                    if (v < best_value) {
                        best_value = v;
                        best = s;
                    }
                }
                opt::SimplexOptions simplex;
                simplex.max_iterations = 400;
                simplex.x_tolerance = 1e-12;
                simplex.f_tolerance = 1e-16;
                simplex.relative_step = 0.5 / (count - 1);
                return opt::nelder_mead([&](const Vector& x) { return f(x, t); }, control, best, best_value, simplex).x;
            },
            "grid-pos");
    }
    opt::SearchSpec spec = opt::SearchSpec::over(control);
    spec.candidates = 256 * static_cast<int>(control.dim());
    spec.x_tolerance = 1e-10;
    spec.max_iterations = 1000;
    return PersonalizedDecision::exact(
        [f, spec](const Vector& t) { return opt::minimize([&](const Vector& s) { return f(s, t); }, spec).x; },
        "grid-pos");
}

DominanceReport dominance_check(const BlackBox& f, const PersonalizedDecision& pos, const PersonalizedDecision& u_e,
                                const PersonalizedDecision& u_m, const QuadratureGrid& grid, const GridSpec& spec,
                                const std::vector<std::pair<std::string, PersonalizedDecision>>& others) {
    DominanceReport report;
    report.tolerance = 2.0 * spec.tolerance;
    const Vector pos_values = node_values(pos, f, grid);
    report.pos = {weighted_sum(pos_values, grid.weights), refined_max(pos, f, grid, pos_values, spec), grid.descriptor};

    auto pointwise = [&](const std::string& name, const PersonalizedDecision& u) {
        const Vector values = node_values(u, f, grid);
        for (Index k = 0; k < values.size(); ++k) {
            if (pos_values[k] > values[k] + kPointwiseTolerance * (1.0 + std::abs(values[k]))) {
                report.violations.push_back(
                    {"f(pos(t),t) <= f(" + name + "(t),t)", grid.nodes.row(k).transpose(), pos_values[k], values[k]});
            }
        }
        return CostEstimate{weighted_sum(values, grid.weights), refined_max(u, f, grid, values, spec),
                            grid.descriptor};
    };
    auto chain = [&](const std::string& relation, double lhs, double rhs) {
        if (lhs > rhs + report.tolerance) {
            report.violations.push_back({relation, Vector(), lhs, rhs});
        }
    };

    report.u_e = pointwise("u_E", u_e);
    report.u_m = pointwise("u_M", u_m);
    for (const auto& [name, u] : others) {
        report.others.emplace_back(name, pointwise(name, u));
    }

    chain("C_E(pos) <= C_E(u_E)", report.pos.expected, report.u_e.expected);
    chain("C_E(u_E) <= C_E(u_M)", report.u_e.expected, report.u_m.expected);
    chain("C_M(pos) <= C_M(u_M)", report.pos.maximum, report.u_m.maximum);
    chain("C_M(u_M) <= C_M(u_E)", report.u_m.maximum, report.u_e.maximum);
    for (const auto& [name, cost] : report.others) {
        chain("C_E(pos) <= C_E(" + name + ")", report.pos.expected, cost.expected);
        chain("C_M(pos) <= C_M(" + name + ")", report.pos.maximum, cost.maximum);
    }
    return report;
}

}  // namespace persopt::robust
