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

#include "persopt/testbed.hpp"

#include <cmath>
#include <numbers>

namespace persopt::testbed {
namespace {

using std::numbers::pi;

double sq(const Vector& s, const Vector& t) {
    const double u = s[0] - t[0];
    return u * u;
}

double f1(const Vector& s, const Vector& t) {
    const double a = s[0];
    const double b = t[0];
    const double u = a - 2.0 * b;
    return 2.0 * std::abs(a * a * a - b) + std::exp(b) * u * u;
}

double f2(const Vector& s, const Vector& t) {
    const double r = std::sqrt(s[0] * s[0] + t[0] * t[0]);
    return std::cos(10.0 * r) / (r + 1.0);
}

double f3(const Vector& s, const Vector& t) {
    return std::min(3.0 - 2.0 * s[0] + 3.0 * t[0], 3.0 + 2.0 * s[0] - t[0]);
}

double f4(const Vector& s, const Vector& t) {
    return branin(15.0 * s[0] - 5.0, 15.0 * t[0]);
}

double f5(const Vector& s, const Vector& t) {
    const double a = s[0] - std::abs(t[0] - t[1]);
    const double b = s[1] - std::sqrt((t[0] * t[0] + t[1] * t[1]) / 2.0);
    return a * a + b * b * b * b;
}

double f6(const Vector& s, const Vector& t) {
    return std::sin(5.0 * s[0] * s[0]) * (t[0] + 2.0 * s[1]) -
           std::cos(5.0 * s[2] * s[2]) / std::sqrt(1.0 + s[3] * s[3]) - 2.0 * t[1] * (s[0] - s[3]);
}

const std::vector<TestFunction>& registry() {
    static const std::vector<TestFunction> functions{
        {"sq", 1, 1, sq}, {"f1", 1, 1, f1}, {"f2", 1, 1, f2}, {"f3", 1, 1, f3},
        {"f4", 1, 1, f4}, {"f5", 2, 2, f5}, {"f6", 4, 2, f6},
    };
    return functions;
}

}  // namespace

double branin(double x1, double x2) {
    const double b = 5.1 / (4.0 * pi * pi);
    const double c = 5.0 / pi;
    const double u = x2 - b * x1 * x1 + c * x1 - 6.0;
    return u * u + 10.0 * (1.0 - 1.0 / (8.0 * pi)) * std::cos(x1) + 10.0;
}

double TestFunction::operator()(const Vector& s, const Vector& t) const {
    if (s.size() != p || t.size() != q) {
        throw DimensionError(id + " expects p = " + std::to_string(p) + ", q = " + std::to_string(q));
    }
    if (!Box::unit(p).contains(s) || !Box::unit(q).contains(t)) {
        throw DomainError(id + " evaluated outside its unit domain");
    }
    return f(s, t);
}

const TestFunction& get(std::string_view id) {
    for (const TestFunction& fn : registry()) {
        if (fn.id == id) {
            return fn;
        }
    }
    throw ConfigError("unknown test function id '" + std::string(id) + "'");
}

std::vector<std::string> ids() {
    std::vector<std::string> out;
    for (const TestFunction& fn : registry()) {
        out.push_back(fn.id);
    }
    return out;
}

double evaluate(std::string_view id, const Vector& s, const Vector& t) {
    return get(id)(s, t);
}

MeteredBlackBox::MeteredBlackBox(BlackBox inner, std::uint64_t cap) : inner_(std::move(inner)), cap_(cap) {}

double MeteredBlackBox::operator()(const Vector& s, const Vector& t) {
    std::uint64_t used = used_.load();
    do {
        if (used >= cap_) {
            throw BudgetExhaustedError("evaluation budget of " + std::to_string(cap_) + " exhausted");
        }
    } while (!used_.compare_exchange_weak(used, used + 1));
    return inner_(s, t);
}

BlackBox MeteredBlackBox::as_black_box() {
    return [this](const Vector& s, const Vector& t) { return (*this)(s, t); };
}

}  // namespace persopt::testbed
