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

#include <benchmark/benchmark.h>

#include <cmath>

#include "persopt/design.hpp"
#include "persopt/gp.hpp"
#include "persopt/sha.hpp"

namespace {

using namespace persopt;

Dataset sample_data(Index n) {
    const Domain domain = Domain::unit(1, 1);
    const Matrix x = design::sobol_points(Box::unit(2), n);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        y[i] = std::sin(5.0 * x(i, 0)) * std::cos(3.0 * x(i, 1)) + x(i, 0) * x(i, 1);
    }
    return Dataset(domain, x, y);
}

void BM_SobolNext(benchmark::State& state) {
    design::SobolStream stream(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(stream.next());
    }
}
BENCHMARK(BM_SobolNext)->Arg(2)->Arg(6);

void BM_FitModel(benchmark::State& state) {
    const Dataset data = sample_data(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(gp::fit_model(data).sigma2());
    }
}
BENCHMARK(BM_FitModel)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
    const auto model = gp::fit_model(sample_data(state.range(0)));
    Vector x0(2);
    x0 << 0.37, 0.61;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.predict(x0, 0.5).mean);
    }
}
BENCHMARK(BM_Predict)->Arg(10)->Arg(50);

void BM_SelectTSha2(benchmark::State& state) {
    const auto model = gp::fit_model(sample_data(state.range(0)));
    auto environment = opt::SearchSpec::over(Box::unit(1), 1);
    environment.candidates = 64;
    auto control = opt::SearchSpec::over(Box::unit(1), 2);
    control.candidates = 64;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sha::select_t_sha2(model, 0.5, Box::unit(1), environment, control).phi);
    }
}
BENCHMARK(BM_SelectTSha2)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
