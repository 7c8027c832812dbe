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

#ifndef PERSOPT_SHA_HPP
#define PERSOPT_SHA_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "persopt/gp.hpp"
#include "persopt/inner_opt.hpp"

namespace persopt::sha {

// Sequential hierarchical search for the profile optimal surface
// s(t) = argmin_s f(s, t). Each iteration picks an environmental value t,
// pairs it with the control value minimizing the lower prediction bound
//
//   L(s, t) = fhat(s, t) - phi(s, t) t_nu(alpha / 2)
//
// and evaluates f there. The two variants differ only in how t is chosen:
//   SHA1  t = argmax_t min_i ||t - t_i||           (space filling in D_t)
//   SHA2  t = argmax_t phi(s~(t), t),  s~(t) = argmin_s L(s, t)

enum class Variant { kSha1, kSha2 };

enum class StopMode {
    kIntegral,    // phi-weighted averages over a frozen t grid
    kMaximum,     // maxima over the same grid
    kBudgetOnly,  // n >= budget
};

std::string to_string(Variant v);
std::string to_string(StopMode m);

// Search budgets for the nested subproblems. The defaults follow the generic
// inner optimizer settings.
struct SearchBudget {
    int candidates_per_dim = 128;
    int polish_top_k = 4;
    int max_iterations = 200;
    double x_tolerance = 1e-6;

    [[nodiscard]] opt::SearchSpec spec(const Box& box, std::uint64_t seed) const;
};

struct ShaConfig {
    Variant variant = Variant::kSha2;
    int n0 = 10;
    double alpha = 0.5;
    int budget = 40;
    double eps1 = 1e-3;
    double eps2 = 1e-3;
    StopMode stop_mode = StopMode::kBudgetOnly;
    // Points of the frozen stopping grid per environmental dimension.
    int stop_grid_per_dim = 128;
    std::uint64_t seed = 0;
    // Sequence index of the first initial-design Sobol' point.
    std::uint64_t design_start_index = 1;

    gp::FitConfig fit;
    // Inner s-search for s~(t) and shat(t).
    SearchBudget control_search;
    // Outer t-search of SHA2.
    SearchBudget environment_search;

    void validate(const Domain& domain) const;
};

struct AcquisitionResult {
    Vector t;
    Vector s;
    double lower = 0.0;  // L(s, t)
    double phi = 0.0;    // phi(s, t)
    // SHA1: min distance of t to the previous t's. SHA2: phi(s~(t), t).
    double criterion = 0.0;
};

// f-hat(shat(t), t) and phi(shat(t), t) on the frozen stopping grid.
struct PosSnapshot {
    Vector value;
    Vector phi;
};

struct StopDiagnostics {
    bool stop = false;
    std::string rule;  // "budget", "integral", "maximum" or "" when not stopping
    double relative_change = std::numeric_limits<double>::quiet_NaN();
    double phi_metric = std::numeric_limits<double>::quiet_NaN();
};

struct ShaState {
    Dataset data;
    gp::GpModel model;
    int iteration = 0;
    std::vector<AcquisitionResult> history;
    Matrix stop_grid;  // frozen t grid, one point per row
    std::optional<PosSnapshot> previous_snapshot;
    std::optional<PosSnapshot> current_snapshot;
};

struct TraceEntry {
    int iteration = 0;
    Index n = 0;
    AcquisitionResult acquisition;
    double y = 0.0;
    StopDiagnostics stop;
};

struct RunResult {
    ShaState state;
    std::vector<TraceEntry> trace;
    StopDiagnostics final_stop;
};

// Thrown by run() when an iteration fails; carries the trace so far.
class RunError : public Error {
public:
    RunError(const std::string& what, std::vector<TraceEntry> partial)
        : Error(what), partial_trace(std::move(partial)) {}
    std::vector<TraceEntry> partial_trace;
};

struct ControlChoice {
    Vector s;
    double lower = 0.0;
};

// s~(t) = argmin_{s in D_s} L(s, t).
ControlChoice profile_lcb_min(const gp::GpModel& model, const Vector& t, double alpha,
                              const opt::SearchSpec& control_spec);

// shat(t) = argmin_{s in D_s} fhat(s, t).
Vector estimate_pos(const gp::GpModel& model, const Vector& t, const opt::SearchSpec& control_spec);

// SHA1 step 3: argmax over D_t of the distance to the current t's.
Vector select_t_sha1(const ShaState& state);

struct EnvironmentChoice {
    Vector t;
    double phi = 0.0;
};

// SHA2 step 3 over an explicit environmental box.
EnvironmentChoice select_t_sha2(const gp::GpModel& model, double alpha, const Box& environment,
                                const opt::SearchSpec& environment_spec,
                                const opt::SearchSpec& control_spec);
Vector select_t_sha2(const ShaState& state, const ShaConfig& config);

// Initial design (first n0 Sobol' points), evaluations and first fit.
ShaState initialize(const BlackBox& f, const Domain& domain, const ShaConfig& config);

// Refits the surrogate on state.data, warm-started from the current theta.
void refit(ShaState& state, const ShaConfig& config);

// One iteration: choose (s, t), evaluate f once, append, refit.
AcquisitionResult step(ShaState& state, const BlackBox& f, const ShaConfig& config);

// Tabulates the current POS estimate on the stopping grid.
PosSnapshot snapshot(const ShaState& state, const ShaConfig& config);

// Evaluates the active stopping rule. The budget rule always applies; the
// integral/maximum rules need two completed iterations and both snapshots.
StopDiagnostics check_stop(const ShaState& state, const ShaConfig& config);

// Frozen environmental grid for the stopping rule.
Matrix stopping_grid(const Box& environment, const ShaConfig& config);

using IterationObserver = std::function<void(const ShaState&, const TraceEntry&)>;

// Algorithm loop: initialize, then step until check_stop says so.
RunResult run(const BlackBox& f, const Domain& domain, const ShaConfig& config,
              const IterationObserver& observer = {});

}  // namespace persopt::sha

#endif  // PERSOPT_SHA_HPP
