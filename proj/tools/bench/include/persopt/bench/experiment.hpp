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

#ifndef PERSOPT_BENCH_EXPERIMENT_HPP
#define PERSOPT_BENCH_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "persopt/gp.hpp"
#include "persopt/robust.hpp"
#include "persopt/sha.hpp"

namespace persopt::bench {

enum class StrategyKind { kSha1, kSha2, kSobol };

struct StrategySpec {
    StrategyKind kind = StrategyKind::kSha2;
    // Unused by the Sobol' baseline.
    double alpha = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] std::string label() const;
};

struct SearchOverrides {
    int control_candidates_per_dim = 128;
    int environment_candidates_per_dim = 128;
    int polish_top_k = 4;
    int max_iterations = 200;
};

struct ExperimentConfig {
    std::string function;
    std::vector<StrategySpec> strategies;
    // 0 picks 10 for p = q = 1 and 20 otherwise.
    int n0 = 0;
    int iterations = 30;
    // Costs are evaluated on every cost_every-th iteration and the last one.
    int cost_every = 1;
    int replicates = 1;
    std::uint64_t seed = 0;
    robust::GridSpec cost_grid;
    std::string output_dir = ".";
    gp::FitConfig fit;
    SearchOverrides search;

    // Parses a JSON document; unknown keys are rejected with ConfigError.
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    [[nodiscard]] std::string to_json() const;

    [[nodiscard]] int resolved_n0() const;
    // Throws ConfigError.
    void validate() const;
};

// Seed of replicate r; shared by every strategy of that replicate.
std::uint64_t replicate_seed(const ExperimentConfig& config, int replicate);
// Sobol' index of the first initial-design point of replicate r.
std::uint64_t replicate_design_start(const ExperimentConfig& config, int replicate);

// One row of the cost table. Baseline rows leave alpha NaN and replicate,
// iteration and n at -1.
struct CostRow {
    std::string function;
    std::string strategy;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    int replicate = -1;
    int iteration = -1;
    Index n = -1;
    double ce = 0.0;
    double cm = 0.0;

    friend bool operator==(const CostRow& a, const CostRow& b);
};

struct CostReport {
    std::string function;
    std::vector<CostRow> rows;
    std::vector<std::string> diagnostics;
    std::vector<std::uint64_t> replicate_seeds;
    std::string grid_descriptor;
    double wall_clock_seconds = 0.0;
    std::string config_json;
};

struct TracePoint {
    int iteration = 0;  // 0 for the initial design
    Vector s;
    Vector t;
    double lower = std::numeric_limits<double>::quiet_NaN();
    double phi = std::numeric_limits<double>::quiet_NaN();
};

struct StrategyTrace {
    StrategySpec strategy;
    int replicate = 0;
    std::vector<TracePoint> points;
};

struct ExperimentResult {
    CostReport report;
    std::vector<StrategyTrace> traces;
    robust::RobustSolution u_e;
    robust::RobustSolution u_m;
};

struct RunOptions {
    int threads = 1;
    // Called after every refit with the current model; must be thread-safe
    // when threads > 1.
    std::function<void(const StrategySpec&, int replicate, const gp::GpModel&)> model_observer;
};

// Runs every (strategy, replicate) pair and appends the u_E / u_M rows. A
// failing pair keeps the rows it produced and adds a diagnostic.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// u_E and u_M of a test function on a cost grid, as report rows.
std::vector<CostRow> baseline_rows(const std::string& function, const robust::QuadratureGrid& grid,
                                   const robust::GridSpec& spec, std::uint64_t seed,
                                   robust::RobustSolution* u_e = nullptr, robust::RobustSolution* u_m = nullptr);

// Values are rounded to 12 significant digits when rows are created, so the
// CSV text is an exact image of the report.
double canonical(double value);

inline constexpr const char* kCsvHeader = "function,strategy,alpha,replicate,iteration,n,ce,cm";

void write_csv(const std::vector<CostRow>& rows, std::ostream& out);
std::vector<CostRow> parse_csv(std::istream& in);
std::string report_json(const CostReport& report, bool include_rows);
void write_trace_csv(const StrategyTrace& trace, std::ostream& out);
std::string trace_file_name(const std::string& function, const StrategyTrace& trace);

}  // namespace persopt::bench

#endif  // PERSOPT_BENCH_EXPERIMENT_HPP
