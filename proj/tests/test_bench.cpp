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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "persopt/bench/experiment.hpp"

namespace persopt {
namespace {

using bench::ExperimentConfig;

ExperimentConfig small(const std::string& function, int iterations, int replicates) {
    return ExperimentConfig::from_json(R"({"function": ")" + function +
                                       R"(", "strategies": [{"kind": "sha2", "alpha": 0.5}, {"kind": "sha1", "alpha": 0.2}, {"kind": "sobol"}],
        "iterations": )" + std::to_string(iterations) +
                                       R"(, "replicates": )" + std::to_string(replicates) + "}");
}

std::string csv_of(const bench::CostReport& report) {
    std::ostringstream out;
    bench::write_csv(report.rows, out);
    return out.str();
}

TEST(Config, ParsesAndFillsDefaults) {
    const auto config = ExperimentConfig::from_json(
        R"({"function": "f5", "strategies": [{"kind": "sha1", "alpha": 0.8}], "seed": 9,
            "cost_grid": {"points_per_dim": 11}, "fit": {"dof": "n-m"}, "search": {"polish_top_k": 2}})");
    EXPECT_EQ(config.resolved_n0(), 20);
    EXPECT_EQ(config.iterations, 30);
    EXPECT_EQ(config.replicates, 1);
    EXPECT_EQ(config.seed, 9u);
    EXPECT_EQ(config.cost_grid.points_per_dim, 11);
    EXPECT_EQ(config.fit.dof, gp::DofRule::kPointsMinusRegressors);
    EXPECT_EQ(config.search.polish_top_k, 2);
    EXPECT_EQ(small("f1", 1, 1).resolved_n0(), 10);
    const auto again = ExperimentConfig::from_json(config.to_json());
    EXPECT_EQ(again.to_json(), config.to_json());
}

TEST(Config, RejectsInvalidDocuments) {
    const char* bad[] = {
        R"({"function": "f1", "strategies": []})",
        R"({"function": "f1", "strategies": [{"kind": "sha2", "alpha": 0.5}], "colour": 1})",
        R"({"function": "f1", "strategies": [{"kind": "sha2", "alpha": 0.5, "beta": 2}]})",
        R"({"function": "f1", "strategies": [{"kind": "sha2", "alpha": 1.5}]})",
        R"({"function": "f1", "strategies": [{"kind": "sha3", "alpha": 0.5}]})",
        R"({"function": "f1", "strategies": [{"kind": "sobol", "alpha": 0.5}]})",
        R"({"function": "f9", "strategies": [{"kind": "sobol"}]})",
        R"({"function": "f1", "strategies": [{"kind": "sobol"}], "iterations": 0})",
        R"({"function": "f1", "strategies": [{"kind": "sobol"}], "replicates": 0})",
        R"({"function": "f1", "strategies": [{"kind": "sobol"}], "cost_every": 0})",
        R"({"function": "f1", "strategies": [{"kind": "sobol"}], "n0": 3})",
        R"({"function": "f1", "strategies": [{"kind": "sobol"}], "cost_grid": {"nodes": 3}})",
        R"({"function": "f1", "strategies": [{"kind": "sobol"}], "iterations": "many"})",
        R"({"function": "f1", "strategies": )",
    };
    for (const char* text : bad) {
        EXPECT_THROW(ExperimentConfig::from_json(text), ConfigError) << text;
    }
}

TEST(Experiment, RowCountsAndOrder) {
    auto config = small("f2", 1, 1);
    config.strategies.resize(1);
    const auto result = bench::run_experiment(config);
    ASSERT_EQ(result.report.rows.size(), 3u);
    EXPECT_EQ(result.report.rows[0].strategy, "sha2");
    EXPECT_EQ(result.report.rows[0].n, 11);
    EXPECT_EQ(result.report.rows[1].strategy, "uE");
    EXPECT_EQ(result.report.rows[2].strategy, "uM");

    const auto multi = bench::run_experiment(small("f3", 2, 2));
    EXPECT_EQ(multi.report.rows.size(), 3u * 2u * 2u + 2u);
    EXPECT_TRUE(multi.report.diagnostics.empty());
    EXPECT_EQ(multi.traces.size(), 6u);
}

TEST(Experiment, CostEveryThinsRowsButNotModels) {
    auto config = small("f3", 5, 1);
    config.strategies.resize(1);
    config.cost_every = 2;
    int observed = 0;
    bench::RunOptions options;
    options.model_observer = [&](const bench::StrategySpec&, int, const gp::GpModel&) { ++observed; };
    const auto result = bench::run_experiment(config, options);
    ASSERT_EQ(result.report.rows.size(), 3u + 2u);
    EXPECT_EQ(result.report.rows[0].iteration, 2);
    EXPECT_EQ(result.report.rows[1].iteration, 4);
    EXPECT_EQ(result.report.rows[2].iteration, 5);
    EXPECT_EQ(observed, 6);
    EXPECT_EQ(ExperimentConfig::from_json(config.to_json()).cost_every, 2);
}

TEST(Experiment, SquareBaselinesAndChains) {
    const auto result = bench::run_experiment(small("sq", 1, 1));
    const auto& rows = result.report.rows;
    const auto& ue = rows[rows.size() - 2];
    const auto& um = rows[rows.size() - 1];
    EXPECT_NEAR(ue.ce, 1.0 / 12.0, 1e-3);
    EXPECT_NEAR(um.cm, 0.25, 1e-6);
    EXPECT_LE(ue.ce, um.ce + 2e-3);
    EXPECT_LE(um.cm, ue.cm + 2e-3);
}

TEST(Experiment, StrategiesShareInitialDesign) {
    const auto result = bench::run_experiment(small("f1", 2, 2));
    for (const auto& a : result.traces) {
        for (const auto& b : result.traces) {
            if (a.replicate != b.replicate) {
                continue;
            }
            for (std::size_t i = 0; i < 10; ++i) {
                EXPECT_EQ(a.points[i].iteration, 0);
                EXPECT_EQ(a.points[i].s, b.points[i].s);
                EXPECT_EQ(a.points[i].t, b.points[i].t);
            }
        }
    }
    EXPECT_NE(result.traces[0].points[0].t, result.traces[1].points[0].t);
}

TEST(Experiment, DeterministicAcrossRunsAndThreads) {
    const auto config = small("f4", 2, 2);
    const auto a = bench::run_experiment(config);
    const auto b = bench::run_experiment(config, {3});
    EXPECT_EQ(csv_of(a.report), csv_of(b.report));
    auto reseeded = config;
    reseeded.seed = 77;
    EXPECT_NE(csv_of(bench::run_experiment(reseeded).report), csv_of(a.report));
}

TEST(Report, CsvRoundTripIsExact) {
    const auto result = bench::run_experiment(small("f2", 2, 1));
    const std::string text = csv_of(result.report);
    EXPECT_EQ(text.substr(0, text.find('\n')), bench::kCsvHeader);
    EXPECT_EQ(text.back(), '\n');
    std::istringstream in(text);
    const auto parsed = bench::parse_csv(in);
    ASSERT_EQ(parsed.size(), result.report.rows.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        EXPECT_EQ(parsed[i], result.report.rows[i]) << i;
    }
    std::ostringstream again;
    bench::write_csv(parsed, again);
    EXPECT_EQ(again.str(), text);
}

TEST(Report, CanonicalValuesHaveTwelveDigits) {
    EXPECT_EQ(bench::canonical(1.0 / 3.0), 0.333333333333);
    EXPECT_EQ(bench::canonical(bench::canonical(2.0 / 3.0)), bench::canonical(2.0 / 3.0));
    EXPECT_TRUE(std::isnan(bench::canonical(std::nan(""))));
    bench::CostRow row;
    row.function = "sq";
    row.strategy = "uE";
    row.ce = bench::canonical(1.0 / 12.0);
    row.cm = 0.25;
    std::ostringstream out;
    bench::write_csv({row}, out);
    EXPECT_EQ(out.str(), std::string(bench::kCsvHeader) + "\nsq,uE,,,,,0.0833333333333,0.25\n");
}

TEST(Report, MalformedCsvIsRejected) {
    std::istringstream wrong_header("a,b\n");
    EXPECT_THROW(bench::parse_csv(wrong_header), Error);
    std::istringstream short_row(std::string(bench::kCsvHeader) + "\nf1,sha2,0.5\n");
    EXPECT_THROW(bench::parse_csv(short_row), Error);
}

TEST(Report, TraceCsvLayout) {
    auto config = small("f5", 1, 1);
    config.strategies.resize(1);
    config.cost_grid.points_per_dim = 5;
    const auto result = bench::run_experiment(config);
    ASSERT_EQ(result.traces.size(), 1u);
    std::ostringstream out;
    bench::write_trace_csv(result.traces[0], out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "iteration,s1,s2,t1,t2,L,phi");
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
    }
    EXPECT_EQ(lines, 21);
    EXPECT_EQ(bench::trace_file_name("f5", result.traces[0]), "f5_trace_sha2_a0.5_r0.csv");
    const std::string json = bench::report_json(result.report, true);
    EXPECT_NE(json.find("\"library_version\""), std::string::npos);
    EXPECT_NE(json.find("\"replicate_seeds\""), std::string::npos);
}

}  // namespace
}  // namespace persopt
