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

#ifndef PERSOPT_GP_HPP
#define PERSOPT_GP_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "persopt/dataset.hpp"

namespace persopt::gp {

// Kriging surrogate with Gaussian correlation and linear trend:
//
//   f(x) = g(x)'beta + Z(x),   g(x) = (1, s_1, ..., s_p, t_1, ..., t_q)'
//   Cov[Z(x1), Z(x2)] = sigma^2 exp(-sum_i theta_i (x1_i - x2_i)^2)
//
// beta and sigma^2 are the closed-form GLS / ML estimates for a given theta;
// theta itself maximizes the profile likelihood. Everything is computed from
// the Cholesky factor of R + nugget * I with triangular solves.

inline constexpr double kDefaultNuggetPerPoint = 1e-10;
inline constexpr double kMaxNugget = 1e-6;

struct CorrelationParams {
    Vector theta;

    void validate(Index d) const;
};

// exp(-sum_i theta_i u_i^2).
double gaussian_correlation(const Vector& u, const CorrelationParams& params);

struct CorrelationFactor {
    Matrix lower;         // L with L L' = R + nugget * I
    double nugget = 0.0;  // nugget actually used after escalation
    double log_det = 0.0;
};

// Correlation matrix of the rows of `points`, factorized. The nugget starts at
// `nugget` and grows x10 up to kMaxNugget while the factorization fails.
// Throws FactorizationError for (near-)duplicate rows or when every nugget
// level fails.
CorrelationFactor build_correlation_matrix(const Matrix& points, const CorrelationParams& params,
                                           double nugget);

// n x (d+1) regressor matrix, rows g(x_i)'.
Matrix regressors(const Matrix& points);

struct GlsEstimate {
    Vector beta;
    double sigma2 = 0.0;
    double q2 = 0.0;  // y'[R^-1 - R^-1 G (G'R^-1 G)^-1 G'R^-1] y = n sigma2
};

// beta = (G'R^-1 G)^-1 G'R^-1 y and sigma2 = (y - G beta)'R^-1 (y - G beta) / n.
// Throws RankDeficientError when G does not have full column rank or n <= m.
GlsEstimate fit_gls(const Dataset& data, const CorrelationParams& params,
                    double nugget_per_point = kDefaultNuggetPerPoint);

// Returned instead of -infinity when sigma2 is at rounding level (below 1e-24
// times the mean squared response).
inline constexpr double kDegenerateLikelihood = std::numeric_limits<double>::max();

// n log(sigma2) + log det(R) at the GLS estimates.
double profile_negloglik(const Dataset& data, const CorrelationParams& params,
                         double nugget_per_point = kDefaultNuggetPerPoint);

enum class DofRule {
    kPointsMinusDims,        // nu = n - d
    kPointsMinusRegressors,  // nu = n - (d + 1)
};

struct FitConfig {
    double theta_min = 1e-3;
    double theta_max = 1e3;
    int starts_per_dim = 10;
    // Number of multistart points refined by the local search; < 0 means all.
    int polish_starts = -1;
    int polish_iterations = 200;
    double log_theta_tolerance = 1e-6;
    bool optimize = true;
    // Used as-is when optimize == false, otherwise ignored.
    Vector fixed_theta;
    // Extra starting values (e.g. the previous fit), searched alongside the
    // space-filling starts.
    std::vector<Vector> warm_starts;
    DofRule dof = DofRule::kPointsMinusDims;
    double nugget_per_point = kDefaultNuggetPerPoint;
    std::uint64_t seed = 0;
};

struct Prediction {
    double mean = 0.0;
    double sd = 0.0;
    double lower = 0.0;
    bool outside_domain = false;
    // phi^2 came out below -1e-8 Q^2 before clamping.
    bool negative_variance = false;
};

// Fitted surrogate. Immutable; concurrent predictions are safe.
class GpModel {
public:
    // Closed-form fit at a fixed theta.
    static GpModel at_theta(Dataset data, const CorrelationParams& params,
                            DofRule dof = DofRule::kPointsMinusDims,
                            double nugget_per_point = kDefaultNuggetPerPoint);

    [[nodiscard]] Prediction predict(const Vector& x0, double alpha) const;
    [[nodiscard]] Prediction predict(const Vector& s, const Vector& t, double alpha) const {
        return predict(data_.domain().join(s, t), alpha);
    }
    // BLUP only; cheaper than predict().
    [[nodiscard]] double mean(const Vector& x0) const;
    // phi(x0)^2 after clamping.
    [[nodiscard]] double variance(const Vector& x0) const;
    // Upper alpha/2 quantile of Student's t with nu degrees of freedom.
    [[nodiscard]] double t_quantile(double alpha) const;

    [[nodiscard]] const CorrelationParams& theta() const { return theta_; }
    [[nodiscard]] const Vector& beta() const { return beta_; }
    [[nodiscard]] double sigma2() const { return sigma2_; }
    [[nodiscard]] double q2() const { return q2_; }
    [[nodiscard]] double nugget() const { return factor_.nugget; }
    [[nodiscard]] double dof() const { return dof_; }
    [[nodiscard]] double negloglik() const { return negloglik_; }
    [[nodiscard]] const Matrix& chol_lower() const { return factor_.lower; }
    [[nodiscard]] const Matrix& regressor_matrix() const { return regressors_; }
    [[nodiscard]] const Dataset& data() const { return data_; }

private:
    GpModel() = default;

    // Correlation vector r0 with the nugget added on exact coincidences, and
    // the matching prior variance term (1 or 1 + nugget).
    double correlation_vector(const Vector& x0, Vector& r0) const;

    Dataset data_{Domain::unit(1, 1)};
    CorrelationParams theta_;
    CorrelationFactor factor_;
    Matrix regressors_;
    Matrix whitened_regressors_;  // L^-1 G
    Matrix trend_chol_;           // upper U with U'U = G'R^-1 G
    Vector beta_;
    Vector weights_;  // R^-1 (y - G beta)
    double sigma2_ = 0.0;
    double q2_ = 0.0;
    double dof_ = 0.0;
    double negloglik_ = 0.0;
};

// Profile-likelihood fit of theta in log coordinates over
// [theta_min, theta_max]^d with multistart Nelder-Mead, then the closed-form
// estimates at the best theta. Throws FactorizationError when every start fails.
GpModel fit_model(const Dataset& data, const FitConfig& config = {});

}  // namespace persopt::gp

#endif  // PERSOPT_GP_HPP
