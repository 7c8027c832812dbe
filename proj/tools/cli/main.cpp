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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "persopt/bench/experiment.hpp"
#include "persopt/testbed.hpp"

namespace {

namespace fs = std::filesystem;
using namespace persopt;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int threads = 1;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Override the master seed");
    cmd->add_option("--out-dir", flags.out_dir, "Directory for output files");
    cmd->add_option("--threads", flags.threads, "Worker threads for replicates")->check(CLI::PositiveNumber);
    cmd->add_option("--format", flags.format, "Cost table format")->check(CLI::IsMember({"csv", "json"}));
}

bench::ExperimentConfig load(const std::string& path, const CommonFlags& flags) {
    bench::ExperimentConfig config = bench::ExperimentConfig::from_file(path);
    if (flags.seed) {
        config.seed = *flags.seed;
    }
    if (flags.out_dir) {
        config.output_dir = *flags.out_dir;
    }
    return config;
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create output directory '" + dir + "': " + ec.message());
    }
    return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    std::cout << path.string() << '\n';
}

void emit_report(const bench::CostReport& report, const fs::path& dir, const std::string& format) {
    if (format == "json") {
        write_file(dir / (report.function + "_costs.json"), bench::report_json(report, true));
        return;
    }
    std::ostringstream csv;
    bench::write_csv(report.rows, csv);
    write_file(dir / (report.function + "_costs.csv"), csv.str());
    write_file(dir / (report.function + "_costs.meta.json"), bench::report_json(report, false));
}

int finish(const bench::CostReport& report) {
    for (const auto& d : report.diagnostics) {
        std::cerr << "warning: " << d << '\n';
    }
    return report.diagnostics.empty() ? kOk : kRuntimeError;
}

int cmd_run(const std::string& path, const CommonFlags& flags, bool traces) {
    const bench::ExperimentConfig config = load(path, flags);
    const fs::path dir = prepare_dir(config.output_dir);
    bench::RunOptions options;
    options.threads = flags.threads;
    const bench::ExperimentResult result = bench::run_experiment(config, options);
    emit_report(result.report, dir, flags.format);
    if (traces) {
        for (const auto& trace : result.traces) {
            std::ostringstream csv;
            bench::write_trace_csv(trace, csv);
            write_file(dir / bench::trace_file_name(config.function, trace), csv.str());
        }
    }
    return finish(result.report);
}

int cmd_baselines(const std::string& function, const CommonFlags& flags) {
    const auto& fn = testbed::get(function);
    robust::GridSpec spec;
    const auto grid = robust::make_grid(fn.domain().environment, spec);
    robust::RobustSolution ue;
    robust::RobustSolution um;
    bench::CostReport report;
    report.function = function;
    report.grid_descriptor = grid.descriptor;
    report.rows = bench::baseline_rows(function, grid, spec, flags.seed.value_or(0), &ue, &um);
    if (flags.out_dir) {
        emit_report(report, prepare_dir(*flags.out_dir), flags.format);
    } else if (flags.format == "json") {
        std::cout << bench::report_json(report, true);
    } else {
        bench::write_csv(report.rows, std::cout);
    }
    std::cerr << "u_E s* =";
    for (Index j = 0; j < ue.s.size(); ++j) {
        std::cerr << ' ' << ue.s[j];
    }
    std::cerr << "\nu_M s* =";
    for (Index j = 0; j < um.s.size(); ++j) {
        std::cerr << ' ' << um.s[j];
    }
    std::cerr << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized optimization experiments"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string config_path;
    std::string function;

    auto* run = app.add_subcommand("run", "Run an experiment and write its cost table");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    add_common(run, flags);

    auto* baselines = app.add_subcommand("baselines", "Robust baselines u_E and u_M of a test function");
    baselines->add_option("function", function, "Test function id")->required();
    add_common(baselines, flags);

    auto* trace = app.add_subcommand("trace", "Run an experiment and dump the evaluated points");
    trace->add_option("config", config_path, "Experiment config (JSON)")->required();
    add_common(trace, flags);

    auto* validate = app.add_subcommand("validate", "Check an experiment config");
    validate->add_option("config", config_path, "Experiment config (JSON)")->required();
    add_common(validate, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run) {
            return cmd_run(config_path, flags, false);
        }
        if (*trace) {
            return cmd_run(config_path, flags, true);
        }
        if (*baselines) {
            return cmd_baselines(function, flags);
        }
        const bench::ExperimentConfig config = load(config_path, flags);
        std::cout << config.to_json() << '\n';
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
