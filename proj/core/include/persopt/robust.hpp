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

#ifndef PERSOPT_ROBUST_HPP
#define PERSOPT_ROBUST_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "persopt/gp.hpp"
#include "persopt/inner_opt.hpp"

namespace persopt::robust {

// Decision quality and robust baselines.
//
//   C_E(u) = int_{D_t} f(u(t), t) phi(t) dt       C_M(u) = max_{t in D_t} f(u(t), t)
//   u_E = argmin_s int f(s, t) phi(t) dt           u_M = argmin_s max_t f(s, t)
//
// All integrals use one shared quadrature grid so that comparisons between
// decisions are exact up to solver tolerance.

using Density = std::function<double(const Vector& t)>;

Density uniform_density(const Box& environment);

struct GridSpec {
    // Midpoint tensor rule for q <= tensor_max_dim, seeded Monte Carlo above.
    int points_per_dim = 101;
    int mc_draws = 4096;
    int tensor_max_dim = 2;
    std::uint64_t seed = 0;
    // Declared quadrature tolerance; comparisons allow twice this.
    double tolerance = 1e-3;
    // Local refinement of the grid maximum for C_M, started from this many
    // well-separated top nodes.
    bool polish_max = true;
    int polish_starts = 4;
    int polish_iterations = 200;
    double polish_x_tolerance = 1e-9;
};

struct QuadratureGrid {
    Box environment;
    Matrix nodes;    // one t per row
    Vector weights;  // phi(t_k) times cell volume
    std::string descriptor;
};

QuadratureGrid make_grid(const Box& environment, const GridSpec& spec, const Density& density);
QuadratureGrid make_grid(const Box& environment, const GridSpec& spec);

// A map from D_t to D_s.
class PersonalizedDecision {
public:
    enum class Kind { kConstant, kSurrogate, kTabulated, kExact };

    static PersonalizedDecision constant(Vector s);
    // shat(t) = argmin_s of the model's predictive mean.
    static PersonalizedDecision surrogate(std::shared_ptr<const gp::GpModel> model, opt::SearchSpec control_spec);
    // Nearest-neighbour lookup in a table of (t_k, s_k) rows.
    static PersonalizedDecision tabulated(Matrix t_points, Matrix s_values);
    static PersonalizedDecision exact(std::function<Vector(const Vector&)> map, std::string label = "exact");

    Vector operator()(const Vector& t) const { return map_(t); }
    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::string& label() const { return label_; }

private:
    PersonalizedDecision(Kind kind, std::function<Vector(const Vector&)> map, std::string label)
        : kind_(kind), map_(std::move(map)), label_(std::move(label)) {}

    Kind kind_;
    std::function<Vector(const Vector&)> map_;
    std::string label_;
};

struct CostEstimate {
    double expected = 0.0;
    double maximum = 0.0;
    std::string descriptor;
};

// Throws DomainError when f(u(t), t) is non-finite at a node.
double expected_cost(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid);
double max_cost(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid,
                const GridSpec& spec = {});
// Both costs with a single pass over the grid.
CostEstimate evaluate_costs(const PersonalizedDecision& u, const BlackBox& f, const QuadratureGrid& grid,
                            const GridSpec& spec = {});

struct RobustSolution {
    Vector s;
    double value = 0.0;  // f_E(s) or f_M(s) on the grid

    [[nodiscard]] PersonalizedDecision decision() const { return PersonalizedDecision::constant(s); }
};

RobustSolution solve_u_e(const BlackBox& f, const Domain& domain, const QuadratureGrid& grid,
                         const opt::SearchSpec& control_spec);
RobustSolution solve_u_m(const BlackBox& f, const Domain& domain, const QuadratureGrid& grid,
                         const opt::SearchSpec& control_spec, const GridSpec& spec = {});

// Reference POS: per t, argmin over a tensor grid of s values followed by a
// local polish. Exact up to solver tolerance for the benchmark functions.
PersonalizedDecision grid_pos_oracle(const BlackBox& f, const Domain& domain, int s_points_per_dim = 101);

struct Violation {
    std::string relation;
    Vector t;  // empty for integral relations
    double lhs = 0.0;
    double rhs = 0.0;
};

struct DominanceReport {
    CostEstimate pos;
    CostEstimate u_e;
    CostEstimate u_m;
    std::vector<std::pair<std::string, CostEstimate>> others;
    std::vector<Violation> violations;
    double tolerance = 0.0;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

// Checks f(s(t), t) <= f(u(t), t) at every grid node for every supplied u and
// the chains C_E(s) <= C_E(u_E) <= C_E(u_M), C_M(s) <= C_M(u_M) <= C_M(u_E),
// allowing twice the declared quadrature tolerance.
DominanceReport dominance_check(const BlackBox& f, const PersonalizedDecision& pos, const PersonalizedDecision& u_e,
                                const PersonalizedDecision& u_m, const QuadratureGrid& grid,
                                const GridSpec& spec = {},
                                const std::vector<std::pair<std::string, PersonalizedDecision>>& others = {});

}  // namespace persopt::robust

#endif  // PERSOPT_ROBUST_HPP
