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

#include "persopt/sha.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "persopt/design.hpp"

namespace persopt::sha {
namespace {

constexpr double kRelativeFloor = 1e-8;

opt::SearchSpec control_spec(const gp::GpModel& model, const ShaConfig& config, std::uint64_t salt) {
    return config.control_search.spec(model.data().domain().control, mix_seed(config.seed, salt));
}

opt::SearchSpec environment_spec(const gp::GpModel& model, const ShaConfig& config, std::uint64_t salt) {
    return config.environment_search.spec(model.data().domain().environment, mix_seed(config.seed, salt));
}

// Salts keep the subproblem seeds of one run distinct but reproducible.
enum Salt : std::uint64_t { kControlSalt = 1, kEnvironmentSalt = 2, kGridSalt = 3, kFitSalt = 1000 };

// Candidate t values ordered by decreasing acquisition criterion; used when
// the preferred (s, t) collides with an existing run.
std::vector<Vector> ranked_fallbacks(const ShaState& state, const ShaConfig& config) {
    const Domain& domain = state.data.domain();
    Matrix candidates;
    std::vector<double> scores;
    if (config.variant == Variant::kSha1) {
        design::MaximinOptions options;
        const Index count = options.candidates_per_dim * domain.q();
        candidates = design::sobol_points(domain.environment, count);
        const Matrix env = state.data.environment_points();
        for (Index i = 0; i < candidates.rows(); ++i) {
            scores.push_back(design::min_distance(candidates.row(i).transpose(), env));
        }
    } else {
        candidates = opt::candidate_set(environment_spec(state.model, config, kEnvironmentSalt));
        const opt::SearchSpec cspec = control_spec(state.model, config, kControlSalt);
        for (Index i = 0; i < candidates.rows(); ++i) {
            const Vector t = candidates.row(i).transpose();
            const ControlChoice c = profile_lcb_min(state.model, t, config.alpha, cspec);
            scores.push_back(state.model.predict(c.s, t, config.alpha).sd);
        }
    }
    std::vector<Index> order(scores.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    std::vector<Vector> out;
    out.reserve(order.size());
    for (Index i : order) {
        out.push_back(candidates.row(i).transpose());
    }
    return out;
}

}  // namespace

std::string to_string(Variant v) {
    return v == Variant::kSha1 ? "sha1" : "sha2";
}

std::string to_string(StopMode m) {
    switch (m) {
        case StopMode::kIntegral:
            return "integral";
        case StopMode::kMaximum:
            return "maximum";
        case StopMode::kBudgetOnly:
            return "budget";
    }
    return "unknown";
}

opt::SearchSpec SearchBudget::spec(const Box& box, std::uint64_t seed) const {
    opt::SearchSpec s = opt::SearchSpec::over(box, seed);
    s.candidates = std::max(1, candidates_per_dim * static_cast<int>(box.dim()));
    s.polish_top_k = polish_top_k;
    s.max_iterations = max_iterations;
    s.x_tolerance = x_tolerance;
    return s;
}

void ShaConfig::validate(const Domain& domain) const {
    domain.validate();
    if (n0 < domain.d() + 2) {
        throw ConfigError("n0 must be at least d + 2 = " + std::to_string(domain.d() + 2));
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0, 1)");
    }
    if (budget < n0) {
        throw ConfigError("budget must be at least n0");
    }
    if (!(eps1 >= 0.0) || !(eps2 >= 0.0)) {
        throw ConfigError("stopping thresholds must be nonnegative");
    }
    if (stop_grid_per_dim < 1) {
        throw ConfigError("stopping grid needs at least one point per dimension");
    }
    if (design_start_index < 1) {
        throw ConfigError("design start index must be >= 1");
    }
}

ControlChoice profile_lcb_min(const gp::GpModel& model, const Vector& t, double alpha,
                              const opt::SearchSpec& control_spec) {
    const Domain& domain = model.data().domain();
    if (t.size() != domain.q()) {
        throw DimensionError("environmental point has the wrong dimension");
    }
    Vector x(domain.d());
    x.tail(domain.q()) = t;
    opt::OptResult best;
    if (alpha == 1.0) {
        best = opt::minimize(
            [&](const Vector& s) {
                x.head(domain.p()) = s;
                return model.mean(x);
            },
            control_spec);
    } else {
        const double quantile = model.t_quantile(alpha);
        best = opt::minimize(
            [&](const Vector& s) {
                x.head(domain.p()) = s;
                const gp::Prediction pred = model.predict(x, 1.0);
                return pred.mean - pred.sd * quantile;
            },
            control_spec);
    }
    return {best.x, best.value};
}

Vector estimate_pos(const gp::GpModel& model, const Vector& t, const opt::SearchSpec& control_spec) {
    return profile_lcb_min(model, t, 1.0, control_spec).s;
}

Vector select_t_sha1(const ShaState& state) {
    const Domain& domain = state.data.domain();
    return design::maximin_next(state.data.environment_points(), domain.environment).point;
}

EnvironmentChoice select_t_sha2(const gp::GpModel& model, double alpha, const Box& environment,
                                const opt::SearchSpec& environment_spec,
                                const opt::SearchSpec& control_spec) {
    opt::SearchSpec spec = environment_spec;
    spec.box = environment;
    const opt::OptResult best = opt::maximize(
        [&](const Vector& t) {
            const ControlChoice c = profile_lcb_min(model, t, alpha, control_spec);
            return model.predict(c.s, t, 1.0).sd;
        },
        spec);
    return {best.x, best.value};
}

Vector select_t_sha2(const ShaState& state, const ShaConfig& config) {
    return select_t_sha2(state.model, config.alpha, state.data.domain().environment,
                         environment_spec(state.model, config, kEnvironmentSalt),
                         control_spec(state.model, config, kControlSalt))
        .t;
}

Matrix stopping_grid(const Box& environment, const ShaConfig& config) {
    opt::SearchSpec spec = opt::SearchSpec::over(environment, mix_seed(config.seed, kGridSalt));
    spec.candidates = config.stop_grid_per_dim * static_cast<int>(environment.dim());
    return opt::candidate_set(spec);
}

ShaState initialize(const BlackBox& f, const Domain& domain, const ShaConfig& config) {
    config.validate(domain);
    const Matrix design = design::sobol_points(domain.joint(), config.n0, config.design_start_index);
    Dataset data(domain);
    for (Index i = 0; i < design.rows(); ++i) {
        const Vector x = design.row(i).transpose();
        data.add(x, f(domain.control_part(x), domain.environment_part(x)));
    }
    gp::FitConfig fit = config.fit;
    fit.seed = mix_seed(config.seed, kFitSalt + static_cast<std::uint64_t>(data.n()));
    gp::GpModel model = gp::fit_model(data, fit);
    return ShaState{std::move(data), std::move(model), 0, {}, stopping_grid(domain.environment, config),
                    std::nullopt, std::nullopt};
}

void refit(ShaState& state, const ShaConfig& config) {
    gp::FitConfig fit = config.fit;
    if (fit.optimize) {
        fit.warm_starts.push_back(state.model.theta().theta);
    }
    fit.seed = mix_seed(config.seed, kFitSalt + static_cast<std::uint64_t>(state.data.n()));
    state.model = gp::fit_model(state.data, fit);
}

AcquisitionResult step(ShaState& state, const BlackBox& f, const ShaConfig& config) {
    if (state.data.n() >= config.budget) {
        throw BudgetExhaustedError("run size has reached the budget");
    }
    const Domain& domain = state.data.domain();
    const opt::SearchSpec cspec = control_spec(state.model, config, kControlSalt);

    Vector t = config.variant == Variant::kSha1 ? select_t_sha1(state) : select_t_sha2(state, config);
    ControlChoice choice = profile_lcb_min(state.model, t, config.alpha, cspec);
    if (state.data.is_duplicate(domain.join(choice.s, t))) {
        bool found = false;
        for (const Vector& alt : ranked_fallbacks(state, config)) {
            ControlChoice c = profile_lcb_min(state.model, alt, config.alpha, cspec);
            if (!state.data.is_duplicate(domain.join(c.s, alt))) {
                t = alt;
                choice = std::move(c);
                found = true;
                break;
            }
        }
        if (!found) {
            throw DuplicatePointError("every candidate environmental value collides with an existing run");
        }
    }

    AcquisitionResult result;
    result.t = t;
    result.s = choice.s;
    const gp::Prediction pred = state.model.predict(choice.s, t, config.alpha);
    result.lower = pred.lower;
    result.phi = pred.sd;
    result.criterion = config.variant == Variant::kSha1
                           ? design::min_distance(t, state.data.environment_points())
                           : pred.sd;

    const double y = f(choice.s, t);
    state.data.add(choice.s, t, y);
    state.history.push_back(result);
    ++state.iteration;
    refit(state, config);
    return result;
}

PosSnapshot snapshot(const ShaState& state, const ShaConfig& config) {
    const Matrix& grid = state.stop_grid;
    const opt::SearchSpec cspec = control_spec(state.model, config, kControlSalt);
    PosSnapshot snap{Vector(grid.rows()), Vector(grid.rows())};
    for (Index i = 0; i < grid.rows(); ++i) {
        const Vector t = grid.row(i).transpose();
        const Vector s = estimate_pos(state.model, t, cspec);
        const gp::Prediction pred = state.model.predict(s, t, 1.0);
        snap.value[i] = pred.mean;
        snap.phi[i] = pred.sd;
    }
    return snap;
}

StopDiagnostics check_stop(const ShaState& state, const ShaConfig& config) {
    StopDiagnostics diag;
    if (state.data.n() >= config.budget) {
        diag.stop = true;
        diag.rule = "budget";
        return diag;
    }
    if (config.stop_mode == StopMode::kBudgetOnly || state.iteration < 2 || !state.previous_snapshot ||
        !state.current_snapshot) {
        return diag;
    }
    const PosSnapshot& prev = *state.previous_snapshot;
    const PosSnapshot& cur = *state.current_snapshot;
    if (prev.value.size() != cur.value.size() || cur.value.size() == 0) {
        throw DimensionError("stopping snapshots are not on the same grid");
    }
    const double floor = kRelativeFloor * (1.0 + state.data.responses().cwiseAbs().maxCoeff());
    Vector rel(cur.value.size());
    for (Index i = 0; i < rel.size(); ++i) {
        rel[i] = std::abs(prev.value[i] - cur.value[i]) / std::max(std::abs(cur.value[i]), floor);
    }
    // Uniform density on D_t: the integral is the grid average.
    if (config.stop_mode == StopMode::kIntegral) {
        diag.relative_change = rel.mean();
        diag.phi_metric = cur.phi.mean();
    } else {
        diag.relative_change = rel.maxCoeff();
        diag.phi_metric = cur.phi.maxCoeff();
    }
    if (diag.relative_change < config.eps1 && diag.phi_metric < config.eps2) {
        diag.stop = true;
        diag.rule = to_string(config.stop_mode);
    }
    return diag;
}

RunResult run(const BlackBox& f, const Domain& domain, const ShaConfig& config, const IterationObserver& observer) {
    std::vector<TraceEntry> trace;
    try {
        ShaState state = initialize(f, domain, config);
        const bool snapshots = config.stop_mode != StopMode::kBudgetOnly;
        StopDiagnostics stop = check_stop(state, config);
        while (!stop.stop) {
            TraceEntry entry;
            entry.acquisition = step(state, f, config);
            entry.y = state.data.responses()[state.data.n() - 1];
            if (snapshots) {
                state.previous_snapshot = std::move(state.current_snapshot);
                state.current_snapshot = snapshot(state, config);
            }
            stop = check_stop(state, config);
            entry.iteration = state.iteration;
            entry.n = state.data.n();
            entry.stop = stop;
            trace.push_back(entry);
            if (observer) {
                observer(state, trace.back());
            }
        }
        return RunResult{std::move(state), std::move(trace), stop};
    } catch (const RunError&) {
        throw;
    } catch (const std::exception& e) {
        throw RunError(std::string("sequential run failed after ") + std::to_string(trace.size()) +
                           " iterations: " + e.what(),
                       std::move(trace));
    }
}

}  // namespace persopt::sha
