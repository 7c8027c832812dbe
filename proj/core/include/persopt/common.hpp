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

#ifndef PERSOPT_COMMON_HPP
#define PERSOPT_COMMON_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace persopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Cost function f(s, t): control inputs s, environmental inputs t.
using BlackBox = std::function<double(const Vector& s, const Vector& t)>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Correlation matrix could not be factorized even after nugget escalation.
class FactorizationError : public Error {
public:
    using Error::Error;
};

class RankDeficientError : public Error {
public:
    using Error::Error;
};

class DuplicatePointError : public Error {
public:
    using Error::Error;
};

class BudgetExhaustedError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Axis-aligned box. Degenerate (lower == upper) coordinates are allowed here;
// Domain is stricter.
struct Box {
    Vector lower;
    Vector upper;

    static Box unit(Index dim);

    [[nodiscard]] Index dim() const { return lower.size(); }
    [[nodiscard]] Vector width() const { return upper - lower; }
    [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const;
    [[nodiscard]] Vector clamp(const Vector& x) const;
    [[nodiscard]] Vector from_unit(const Vector& u) const;
    [[nodiscard]] Vector to_unit(const Vector& x) const;
    [[nodiscard]] double volume() const;
    // All 2^dim corners, one per row.
    [[nodiscard]] Matrix corners() const;

    void validate(bool allow_degenerate = true) const;
};

// Control box D_s (p dims) and environmental box D_t (q dims). A joint point
// is x = (s', t')'.
struct Domain {
    Box control;
    Box environment;

    static Domain unit(Index p, Index q);

    [[nodiscard]] Index p() const { return control.dim(); }
    [[nodiscard]] Index q() const { return environment.dim(); }
    [[nodiscard]] Index d() const { return p() + q(); }

    [[nodiscard]] Box joint() const;
    [[nodiscard]] Vector join(const Vector& s, const Vector& t) const;
    [[nodiscard]] Vector control_part(const Vector& x) const { return x.head(p()); }
    [[nodiscard]] Vector environment_part(const Vector& x) const { return x.tail(q()); }

    void validate() const;
};

// Derives an independent, reproducible seed for a sub-task.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace persopt

#endif  // PERSOPT_COMMON_HPP
