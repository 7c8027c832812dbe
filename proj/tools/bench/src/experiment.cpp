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

#include <atomic>
#include <chrono>
#include <memory>
#include <thread>

#include "persopt/bench/experiment.hpp"
#include "persopt/design.hpp"
#include "persopt/testbed.hpp"

namespace persopt::bench {
namespace {

enum Salt : std::uint64_t { kReplicateSalt = 100, kPosSalt = 4, kUeSalt = 5, kUmSalt = 6 };

struct TaskResult {
    std::vector<CostRow> rows;
    StrategyTrace trace;
    std::string diagnostic;
};

sha::ShaConfig sha_config(const ExperimentConfig& config, const StrategySpec& strategy, int replicate) {
    sha::ShaConfig sc;
    sc.variant = strategy.kind == StrategyKind::kSha1 ? sha::Variant::kSha1 : sha::Variant::kSha2;
    sc.n0 = config.resolved_n0();
    // The Sobol' baseline never uses alpha; any valid value keeps validation happy.
    sc.alpha = strategy.kind == StrategyKind::kSobol ? 0.5 : strategy.alpha;
    sc.budget = sc.n0 + config.iterations;
    sc.seed = replicate_seed(config, replicate);
    sc.design_start_index = replicate_design_start(config, replicate);
    sc.fit = config.fit;
    sc.control_search.candidates_per_dim = config.search.control_candidates_per_dim;
    sc.control_search.polish_top_k = config.search.polish_top_k;
    sc.control_search.max_iterations = config.search.max_iterations;
    sc.environment_search.candidates_per_dim = config.search.environment_candidates_per_dim;
    sc.environment_search.polish_top_k = config.search.polish_top_k;
    sc.environment_search.max_iterations = config.search.max_iterations;
    return sc;
}

TaskResult run_task(const ExperimentConfig& config, const StrategySpec& strategy, int replicate,
                    const robust::QuadratureGrid& grid, const RunOptions& options) {
    TaskResult out;
    out.trace.strategy = strategy;
    out.trace.replicate = replicate;
    const auto& fn = testbed::get(config.function);
    const Domain domain = fn.domain();
    const sha::ShaConfig sc = sha_config(config, strategy, replicate);
    try {
        sha::ShaState state = sha::initialize(fn.f, domain, sc);
        if (options.model_observer) {
            options.model_observer(strategy, replicate, state.model);
        }
        for (Index i = 0; i < state.data.n(); ++i) {
            const Vector x = state.data.points().row(i).transpose();
            out.trace.points.push_back({0, domain.control_part(x), domain.environment_part(x)});
        }
        design::SobolStream baseline(static_cast<int>(domain.d()), sc.design_start_index + sc.n0);
        const opt::SearchSpec pos_spec = sc.control_search.spec(domain.control, mix_seed(sc.seed, kPosSalt));

        for (int k = 1; k <= config.iterations; ++k) {
            TracePoint point;
            point.iteration = k;
            if (strategy.kind == StrategyKind::kSobol) {
                const Vector x = baseline.next(domain.joint());
                point.s = domain.control_part(x);
                point.t = domain.environment_part(x);
                point.phi = state.model.predict(x, 1.0).sd;
                state.data.add(x, fn.f(point.s, point.t));
                ++state.iteration;
                sha::refit(state, sc);
            } else {
                const sha::AcquisitionResult acq = sha::step(state, fn.f, sc);
                point.s = acq.s;
                point.t = acq.t;
                point.lower = acq.lower;
                point.phi = acq.phi;
            }
            out.trace.points.push_back(point);
            if (options.model_observer) {
                options.model_observer(strategy, replicate, state.model);
            }
            if (k % config.cost_every != 0 && k != config.iterations) {
                continue;
            }

            const auto decision =
                robust::PersonalizedDecision::surrogate(std::make_shared<gp::GpModel>(state.model), pos_spec);
            const robust::CostEstimate cost = robust::evaluate_costs(decision, fn.f, grid, config.cost_grid);
            CostRow row;
            row.function = config.function;
            row.strategy = strategy.label();
            row.alpha = strategy.kind == StrategyKind::kSobol ? std::numeric_limits<double>::quiet_NaN()
                                                               : canonical(strategy.alpha);
            row.replicate = replicate;
            row.iteration = k;
            row.n = state.data.n();
            row.ce = canonical(cost.expected);
            row.cm = canonical(cost.maximum);
            out.rows.push_back(row);
        }
    } catch (const std::exception& e) {
        out.diagnostic = strategy.label() + " replicate " + std::to_string(replicate) + " failed after " +
                         std::to_string(out.rows.size()) + " iterations: " + e.what();
    }
    return out;
}

}  // namespace

std::uint64_t replicate_seed(const ExperimentConfig& config, int replicate) {
    return mix_seed(config.seed, kReplicateSalt + static_cast<std::uint64_t>(replicate));
}

std::uint64_t replicate_design_start(const ExperimentConfig& config, int replicate) {
    return 1 + static_cast<std::uint64_t>(replicate) * static_cast<std::uint64_t>(config.resolved_n0());
}

std::vector<CostRow> baseline_rows(const std::string& function, const robust::QuadratureGrid& grid,
                                   const robust::GridSpec& spec, std::uint64_t seed, robust::RobustSolution* u_e,
                                   robust::RobustSolution* u_m) {
    const auto& fn = testbed::get(function);
    const Domain domain = fn.domain();
    const robust::RobustSolution ue =
        robust::solve_u_e(fn.f, domain, grid, opt::SearchSpec::over(domain.control, mix_seed(seed, kUeSalt)));
    const robust::RobustSolution um =
        robust::solve_u_m(fn.f, domain, grid, opt::SearchSpec::over(domain.control, mix_seed(seed, kUmSalt)), spec);
    std::vector<CostRow> rows;
    for (const auto& [label, solution] : {std::pair{"uE", &ue}, std::pair{"uM", &um}}) {
        const robust::CostEstimate cost = robust::evaluate_costs(solution->decision(), fn.f, grid, spec);
        CostRow row;
        row.function = function;
        row.strategy = label;
        row.ce = canonical(cost.expected);
        row.cm = canonical(cost.maximum);
        rows.push_back(row);
    }
    if (u_e != nullptr) {
        *u_e = ue;
    }
    if (u_m != nullptr) {
        *u_m = um;
    }
    return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const auto& fn = testbed::get(config.function);
    const robust::QuadratureGrid grid = robust::make_grid(fn.domain().environment, config.cost_grid);

    struct Task {
        std::size_t strategy;
        int replicate;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < config.strategies.size(); ++i) {
        for (int r = 0; r < config.replicates; ++r) {
            tasks.push_back({i, r});
        }
    }
    std::vector<TaskResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            results[k] = run_task(config, config.strategies[tasks[k].strategy], tasks[k].replicate, grid, options);
        }
    };
    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(tasks.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    ExperimentResult result;
    CostReport& report = result.report;
    report.function = config.function;
    report.grid_descriptor = grid.descriptor;
    report.config_json = config.to_json();
    for (int r = 0; r < config.replicates; ++r) {
        report.replicate_seeds.push_back(replicate_seed(config, r));
    }
    for (auto& task : results) {
        report.rows.insert(report.rows.end(), task.rows.begin(), task.rows.end());
        if (!task.diagnostic.empty()) {
            report.diagnostics.push_back(task.diagnostic);
        }
        result.traces.push_back(std::move(task.trace));
    }
    try {
        const auto rows = baseline_rows(config.function, grid, config.cost_grid, config.seed, &result.u_e, &result.u_m);
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    } catch (const std::exception& e) {
        report.diagnostics.push_back(std::string("robust baselines failed: ") + e.what());
    }
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace persopt::bench
