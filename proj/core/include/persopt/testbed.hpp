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

#ifndef PERSOPT_TESTBED_HPP
#define PERSOPT_TESTBED_HPP

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "persopt/common.hpp"

namespace persopt::testbed {

// Benchmark cost functions on the unit boxes D_s = [0,1]^p, D_t = [0,1]^q.
//
//   sq  (s - t)^2
//   f1  2|s^3 - t| + exp(t)(s - 2t)^2
//   f2  cos(10 r) / (r + 1),  r = sqrt(s^2 + t^2)
//   f3  min(3 - 2s + 3t, 3 + 2s - t)
//   f4  Branin at x1 = 15s - 5, x2 = 15t
//   f5  (s1 - |t1 - t2|)^2 + (s2 - sqrt((t1^2 + t2^2) / 2))^4       p = q = 2
//   f6  sin(5 s1^2)(t1 + 2 s2) - cos(5 s3^2) / sqrt(1 + s4^2)
//         - 2 t2 (s1 - s4)                                            p = 4, q = 2
struct TestFunction {
    std::string id;
    Index p = 1;
    Index q = 1;
    BlackBox f;

    [[nodiscard]] Domain domain() const { return Domain::unit(p, q); }
    // Checks dimensions and domain membership, then evaluates.
    double operator()(const Vector& s, const Vector& t) const;
};

// Throws ConfigError for unknown ids.
const TestFunction& get(std::string_view id);
std::vector<std::string> ids();

double evaluate(std::string_view id, const Vector& s, const Vector& t);

double branin(double x1, double x2);

// Counts evaluations of a black box and refuses to exceed a cap.
class MeteredBlackBox {
public:
    MeteredBlackBox(BlackBox inner, std::uint64_t cap);

    // Throws BudgetExhaustedError once `cap` evaluations have been used.
    double operator()(const Vector& s, const Vector& t);

    [[nodiscard]] std::uint64_t used() const { return used_.load(); }
    [[nodiscard]] std::uint64_t cap() const { return cap_; }
    [[nodiscard]] std::uint64_t remaining() const { return cap_ - used(); }

    // Callable view; the meter must outlive it.
    BlackBox as_black_box();

private:
    BlackBox inner_;
    std::uint64_t cap_;
    std::atomic<std::uint64_t> used_{0};
};

}  // namespace persopt::testbed

#endif  // PERSOPT_TESTBED_HPP
