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
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "persopt/bench/experiment.hpp"

#ifndef PERSOPT_VERSION
#define PERSOPT_VERSION "unknown"
#endif

namespace persopt::bench {
namespace {

std::string format_number(double value, int digits) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
    return buffer;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& text) {
    if (text.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
        throw Error("malformed number '" + text + "' in cost table");
    }
    return value;
}

long long parse_int(const std::string& text) {
    if (text.empty()) {
        return -1;
    }
    char* end = nullptr;
    const long long value = std::strtoll(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size()) {
        throw Error("malformed integer '" + text + "' in cost table");
    }
    return value;
}

}  // namespace

bool operator==(const CostRow& a, const CostRow& b) {
    return a.function == b.function && a.strategy == b.strategy && same(a.alpha, b.alpha) &&
           a.replicate == b.replicate && a.iteration == b.iteration && a.n == b.n && same(a.ce, b.ce) &&
           same(a.cm, b.cm);
}

double canonical(double value) {
    if (!std::isfinite(value)) {
        return value;
    }
    return std::strtod(format_number(value, 12).c_str(), nullptr);
}

void write_csv(const std::vector<CostRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        out << row.function << ',' << row.strategy << ',' << (std::isnan(row.alpha) ? "" : format_number(row.alpha, 12))
            << ',' << (row.replicate < 0 ? "" : std::to_string(row.replicate)) << ','
            << (row.iteration < 0 ? "" : std::to_string(row.iteration)) << ','
            << (row.n < 0 ? "" : std::to_string(row.n)) << ',' << format_number(row.ce, 12) << ','
            << format_number(row.cm, 12) << '\n';
    }
}

std::vector<CostRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw Error("cost table has an unexpected header");
    }
    std::vector<CostRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split(line);
        if (f.size() != 8) {
            throw Error("cost table row has " + std::to_string(f.size()) + " fields: " + line);
        }
        CostRow row;
        row.function = f[0];
        row.strategy = f[1];
        row.alpha = parse_double(f[2]);
        row.replicate = static_cast<int>(parse_int(f[3]));
        row.iteration = static_cast<int>(parse_int(f[4]));
        row.n = static_cast<Index>(parse_int(f[5]));
        row.ce = parse_double(f[6]);
        row.cm = parse_double(f[7]);
        rows.push_back(row);
    }
    return rows;
}

std::string report_json(const CostReport& report, bool include_rows) {
    using nlohmann::json;
    json doc;
    doc["function"] = report.function;
    doc["library_version"] = PERSOPT_VERSION;
    doc["cost_grid"] = report.grid_descriptor;
    doc["replicate_seeds"] = report.replicate_seeds;
    doc["wall_clock_seconds"] = report.wall_clock_seconds;
    doc["diagnostics"] = report.diagnostics;
    doc["row_count"] = report.rows.size();
    doc["config"] = report.config_json.empty() ? json(nullptr) : json::parse(report.config_json);
    if (include_rows) {
        doc["rows"] = json::array();
        for (const auto& row : report.rows) {
            json item{{"function", row.function}, {"strategy", row.strategy}, {"ce", row.ce}, {"cm", row.cm}};
            item["alpha"] = std::isnan(row.alpha) ? json(nullptr) : json(row.alpha);
            item["replicate"] = row.replicate < 0 ? json(nullptr) : json(row.replicate);
            item["iteration"] = row.iteration < 0 ? json(nullptr) : json(row.iteration);
            item["n"] = row.n < 0 ? json(nullptr) : json(row.n);
            doc["rows"].push_back(item);
        }
    }
    return doc.dump(2) + "\n";
}

void write_trace_csv(const StrategyTrace& trace, std::ostream& out) {
    if (trace.points.empty()) {
        out << "iteration,L,phi\n";
        return;
    }
    const Index p = trace.points.front().s.size();
    const Index q = trace.points.front().t.size();
    out << "iteration";
    for (Index j = 1; j <= p; ++j) {
        out << ",s" << j;
    }
    for (Index j = 1; j <= q; ++j) {
        out << ",t" << j;
    }
    out << ",L,phi\n";
    for (const auto& point : trace.points) {
        out << point.iteration;
        for (Index j = 0; j < p; ++j) {
            out << ',' << format_number(point.s[j], 17);
        }
        for (Index j = 0; j < q; ++j) {
            out << ',' << format_number(point.t[j], 17);
        }
        out << ',' << format_number(point.lower, 17) << ',' << format_number(point.phi, 17) << '\n';
    }
}

std::string trace_file_name(const std::string& function, const StrategyTrace& trace) {
    std::string name = function + "_trace_" + trace.strategy.label();
    if (!std::isnan(trace.strategy.alpha)) {
        name += "_a" + format_number(trace.strategy.alpha, 6);
    }
    return name + "_r" + std::to_string(trace.replicate) + ".csv";
}

}  // namespace persopt::bench
