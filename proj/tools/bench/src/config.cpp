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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "persopt/bench/experiment.hpp"
#include "persopt/testbed.hpp"

namespace persopt::bench {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& allowed, const std::string& where) {
    if (!object.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& item : object.items()) {
        if (allowed.count(item.key()) == 0) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
    if (!object.contains(key)) {
        return;
    }
    try {
        target = object.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("key '") + key + "' has the wrong type");
    }
}

StrategySpec parse_strategy(const json& item) {
    reject_unknown(item, {"kind", "alpha"}, "strategy");
    StrategySpec spec;
    std::string kind;
    read(item, "kind", kind);
    if (kind == "sha1") {
        spec.kind = StrategyKind::kSha1;
    } else if (kind == "sha2") {
        spec.kind = StrategyKind::kSha2;
    } else if (kind == "sobol") {
        spec.kind = StrategyKind::kSobol;
    } else {
        throw ConfigError("strategy kind must be sha1, sha2 or sobol");
    }
    read(item, "alpha", spec.alpha);
    return spec;
}

}  // namespace

std::string StrategySpec::label() const {
    switch (kind) {
        case StrategyKind::kSha1:
            return "sha1";
        case StrategyKind::kSha2:
            return "sha2";
        case StrategyKind::kSobol:
            return "sobol";
    }
    return "unknown";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(doc,
                   {"function", "strategies", "n0", "iterations", "cost_every", "replicates", "seed", "cost_grid",
                    "output_dir", "fit", "search"},
                   "config");
    ExperimentConfig config;
    read(doc, "function", config.function);
    if (doc.contains("strategies")) {
        if (!doc["strategies"].is_array()) {
            throw ConfigError("strategies must be an array");
        }
        for (const auto& item : doc["strategies"]) {
            config.strategies.push_back(parse_strategy(item));
        }
    }
    read(doc, "n0", config.n0);
    read(doc, "iterations", config.iterations);
    read(doc, "cost_every", config.cost_every);
    read(doc, "replicates", config.replicates);
    read(doc, "seed", config.seed);
    read(doc, "output_dir", config.output_dir);
    if (doc.contains("cost_grid")) {
        const json& grid = doc["cost_grid"];
        reject_unknown(grid, {"points_per_dim", "mc_draws", "seed", "tolerance"}, "cost_grid");
        read(grid, "points_per_dim", config.cost_grid.points_per_dim);
        read(grid, "mc_draws", config.cost_grid.mc_draws);
        read(grid, "seed", config.cost_grid.seed);
        read(grid, "tolerance", config.cost_grid.tolerance);
    }
    if (doc.contains("fit")) {
        const json& fit = doc["fit"];
        reject_unknown(fit, {"theta_min", "theta_max", "starts_per_dim", "polish_starts", "dof"}, "fit");
        read(fit, "theta_min", config.fit.theta_min);
        read(fit, "theta_max", config.fit.theta_max);
        read(fit, "starts_per_dim", config.fit.starts_per_dim);
        read(fit, "polish_starts", config.fit.polish_starts);
        std::string dof = "n-d";
        read(fit, "dof", dof);
        if (dof == "n-d") {
            config.fit.dof = gp::DofRule::kPointsMinusDims;
        } else if (dof == "n-m") {
            config.fit.dof = gp::DofRule::kPointsMinusRegressors;
        } else {
            throw ConfigError("fit.dof must be \"n-d\" or \"n-m\"");
        }
    }
    if (doc.contains("search")) {
        const json& search = doc["search"];
        reject_unknown(search,
                       {"control_candidates_per_dim", "environment_candidates_per_dim", "polish_top_k",
                        "max_iterations"},
                       "search");
        read(search, "control_candidates_per_dim", config.search.control_candidates_per_dim);
        read(search, "environment_candidates_per_dim", config.search.environment_candidates_per_dim);
        read(search, "polish_top_k", config.search.polish_top_k);
        read(search, "max_iterations", config.search.max_iterations);
    }
    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return from_json(text.str());
}

std::string ExperimentConfig::to_json() const {
    json doc;
    doc["function"] = function;
    doc["strategies"] = json::array();
    for (const auto& s : strategies) {
        json item{{"kind", s.label()}};
        if (s.kind != StrategyKind::kSobol) {
            item["alpha"] = s.alpha;
        }
        doc["strategies"].push_back(item);
    }
    doc["n0"] = resolved_n0();
    doc["iterations"] = iterations;
    doc["cost_every"] = cost_every;
    doc["replicates"] = replicates;
    doc["seed"] = seed;
    doc["cost_grid"] = {{"points_per_dim", cost_grid.points_per_dim},
                        {"mc_draws", cost_grid.mc_draws},
                        {"seed", cost_grid.seed},
                        {"tolerance", cost_grid.tolerance}};
    doc["output_dir"] = output_dir;
    doc["fit"] = {{"theta_min", fit.theta_min},
                  {"theta_max", fit.theta_max},
                  {"starts_per_dim", fit.starts_per_dim},
                  {"polish_starts", fit.polish_starts},
                  {"dof", fit.dof == gp::DofRule::kPointsMinusDims ? "n-d" : "n-m"}};
    doc["search"] = {{"control_candidates_per_dim", search.control_candidates_per_dim},
                     {"environment_candidates_per_dim", search.environment_candidates_per_dim},
                     {"polish_top_k", search.polish_top_k},
                     {"max_iterations", search.max_iterations}};
    return doc.dump(2);
}

int ExperimentConfig::resolved_n0() const {
    if (n0 > 0) {
        return n0;
    }
    const auto& fn = testbed::get(function);
    return fn.p == 1 && fn.q == 1 ? 10 : 20;
}

void ExperimentConfig::validate() const {
    if (function.empty()) {
        throw ConfigError("config needs a function id");
    }
    const auto& fn = testbed::get(function);
    if (strategies.empty()) {
        throw ConfigError("config needs at least one strategy");
    }
    for (const auto& s : strategies) {
        if (s.kind != StrategyKind::kSobol && !(s.alpha > 0.0 && s.alpha < 1.0)) {
            throw ConfigError(s.label() + " needs an alpha in (0, 1)");
        }
        if (s.kind == StrategyKind::kSobol && !std::isnan(s.alpha)) {
            throw ConfigError("the sobol strategy takes no alpha");
        }
    }
    if (iterations < 1) {
        throw ConfigError("iterations must be >= 1");
    }
    if (cost_every < 1) {
        throw ConfigError("cost_every must be >= 1");
    }
    if (replicates < 1) {
        throw ConfigError("replicates must be >= 1");
    }
    if (n0 < 0 || resolved_n0() < fn.p + fn.q + 2) {
        throw ConfigError("n0 must be at least d + 2");
    }
    if (cost_grid.points_per_dim < 1 || cost_grid.mc_draws < 1 || !(cost_grid.tolerance > 0.0)) {
        throw ConfigError("cost_grid sizes must be positive");
    }
    if (!(fit.theta_min > 0.0 && fit.theta_min < fit.theta_max) || fit.starts_per_dim < 1) {
        throw ConfigError("fit settings are invalid");
    }
    if (search.control_candidates_per_dim < 1 || search.environment_candidates_per_dim < 1 ||
        search.polish_top_k < 0 || search.max_iterations < 1) {
        throw ConfigError("search settings are invalid");
    }
}

}  // namespace persopt::bench
