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

#include <algorithm>
#include <cmath>
#include <random>

#include "persopt/gp.hpp"
#include "support.hpp"

namespace persopt {
namespace {

using testing::dense_oracle;
using testing::rel_err;
using testing::vec;

Dataset four_point_data() {
    Matrix x(4, 2);
    x << 0.1, 0.2, 0.4, 0.9, 0.7, 0.3, 0.95, 0.6;
    return Dataset(Domain::unit(1, 1), x, vec({1.3, -0.4, 2.1, 0.8}));
}

Dataset five_point_data() {
    Matrix x(5, 2);
    x << 0.1, 0.2, 0.4, 0.9, 0.7, 0.3, 0.95, 0.6, 0.3, 0.5;
    return Dataset(Domain::unit(1, 1), x, vec({1.3, -0.4, 2.1, 0.8, 0.2}));
}

TEST(GaussianCorrelation, ClosedForms) {
    EXPECT_EQ(gp::gaussian_correlation(vec({0.0, 0.0}), {vec({3.0, 7.0})}), 1.0);
    EXPECT_NEAR(gp::gaussian_correlation(vec({1.0}), {vec({1.0})}), 0.36787944117144233, 1e-15);
    EXPECT_NEAR(gp::gaussian_correlation(vec({1.0, 2.0}), {vec({2.0, 0.5})}), 0.018315638888734179, 1e-15);
}

TEST(GaussianCorrelation, RejectsBadInput) {
    EXPECT_THROW(gp::gaussian_correlation(vec({1.0, 2.0}), {vec({1.0})}), DimensionError);
    EXPECT_THROW(gp::gaussian_correlation(vec({1.0}), {vec({0.0})}), DomainError);
    EXPECT_THROW(gp::gaussian_correlation(vec({1.0}), {vec({-2.0})}), DomainError);
}

TEST(CorrelationMatrix, NearDuplicateRowsFail) {
    Matrix x(2, 2);
    x << 0.3, 0.3, 0.3 + 1e-12, 0.3;
    EXPECT_THROW(gp::build_correlation_matrix(x, {vec({1.0, 1.0})}, 2e-10), FactorizationError);
}

TEST(CorrelationMatrix, LargeThetaGivesIdentity) {
    Matrix x(3, 2);
    x << 0.1, 0.1, 0.5, 0.6, 0.9, 0.2;
    const double nugget = 3e-10;
    const auto factor = gp::build_correlation_matrix(x, {vec({1e8, 1e8})}, nugget);
    for (Index i = 0; i < 3; ++i) {
        EXPECT_NEAR(factor.lower(i, i), std::sqrt(1.0 + nugget), 1e-15);
        for (Index j = 0; j < i; ++j) {
            EXPECT_NEAR(factor.lower(i, j), 0.0, 1e-300);
        }
    }
}

TEST(CorrelationMatrix, ThreePointsOnALineMatchDenseDecomposition) {
    Matrix x(3, 1);
    x << 0.0, 0.5, 1.0;
    const double nugget = 3e-10;
    const auto factor = gp::build_correlation_matrix(x, {vec({1.0})}, nugget);

    oracle::LMatrix r(3, 3);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
            const long double u = x(i, 0) - x(j, 0);
            r(i, j) = std::exp(-u * u) + (i == j ? nugget : 0.0L);
        }
    }
    EXPECT_NEAR(static_cast<double>(r(0, 1)), 0.77880078307140487, 1e-15);
    EXPECT_NEAR(static_cast<double>(r(0, 2)), 0.36787944117144232, 1e-15);
    const oracle::LMatrix want = r.llt().matrixL();
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j <= i; ++j) {
            EXPECT_NEAR(factor.lower(i, j), static_cast<double>(want(i, j)), 1e-12) << i << "," << j;
        }
    }
    const Matrix rebuilt = factor.lower * factor.lower.transpose();
    EXPECT_NEAR(rebuilt(1, 2), std::exp(-0.25), 1e-15);
    EXPECT_NEAR(factor.log_det, static_cast<double>(std::log(r.determinant())), 1e-10);
}

TEST(FitGls, ConstantResponse) {
    Dataset data = four_point_data();
    Dataset flat(data.domain(), data.points(), Vector::Constant(4, 2.5));
    const auto est = gp::fit_gls(flat, {vec({1.0, 1.0})});
    EXPECT_NEAR(est.beta[0], 2.5, 1e-10);
    EXPECT_NEAR(est.beta[1], 0.0, 1e-10);
    EXPECT_NEAR(est.beta[2], 0.0, 1e-10);
    EXPECT_NEAR(est.sigma2, 0.0, 1e-20);
    EXPECT_EQ(gp::profile_negloglik(flat, {vec({1.0, 1.0})}), gp::kDegenerateLikelihood);
}

TEST(FitGls, IdentityCorrelationIsLeastSquares) {
    const Dataset data = testing::random_dataset(Domain::unit(1, 1), 9, 7);
    const auto est = gp::fit_gls(data, {vec({1e7, 1e7})});
    const Matrix g = gp::regressors(data.points());
    const Vector ols = g.householderQr().solve(data.responses());
    EXPECT_LT((est.beta - ols).norm(), 1e-8);
    const double rss = (data.responses() - g * ols).squaredNorm();
    EXPECT_NEAR(est.sigma2, rss / 9.0, 1e-9);
    EXPECT_NEAR(gp::profile_negloglik(data, {vec({1e7, 1e7})}), 9.0 * std::log(rss / 9.0), 1e-8);
}

TEST(FitGls, FourPointsMatchFrozenOracle) {
    const auto est = gp::fit_gls(four_point_data(), {vec({1.5, 0.8})});
    EXPECT_NEAR(est.beta[0], 1.8587522656129195, 1e-10);
    EXPECT_NEAR(est.beta[1], 0.9254377502418014, 1e-10);
    EXPECT_NEAR(est.beta[2], -3.5657653683053669, 1e-10);
    EXPECT_NEAR(est.sigma2, 0.48103358521288917, 1e-10);
    EXPECT_NEAR(est.q2, 1.9241343408515567, 1e-10);
    EXPECT_NEAR(est.q2, 4.0 * est.sigma2, 1e-12);
}

TEST(FitGls, RankDeficientDesign) {
    Matrix x(5, 2);
    x << 0.5, 0.1, 0.5, 0.3, 0.5, 0.5, 0.5, 0.7, 0.5, 0.9;
    const Dataset data(Domain::unit(1, 1), x, vec({1, 2, 3, 4, 5}));
    EXPECT_THROW(gp::fit_gls(data, {vec({1.0, 1.0})}), RankDeficientError);

    Matrix few(3, 2);
    few << 0.1, 0.1, 0.5, 0.9, 0.9, 0.4;
    const Dataset small(Domain::unit(1, 1), few, vec({1, 2, 3}));
    EXPECT_THROW(gp::fit_gls(small, {vec({1.0, 1.0})}), RankDeficientError);
}

TEST(ProfileNegLogLik, FivePointsMatchFrozenOracle) {
    EXPECT_NEAR(gp::profile_negloglik(five_point_data(), {vec({2.0, 3.0})}), -6.1212897192168896, 1e-9);
}

TEST(ProfileNegLogLik, ScalingShiftsByTwoNLogA) {
    const Dataset data = testing::random_dataset(Domain::unit(1, 1), 8, 3);
    const gp::CorrelationParams theta{vec({4.0, 2.0})};
    for (double a : {0.01, 0.5, 3.0, 1e3}) {
        const Dataset scaled(data.domain(), data.points(), a * data.responses());
        EXPECT_NEAR(gp::profile_negloglik(scaled, theta) - gp::profile_negloglik(data, theta),
                    2.0 * 8.0 * std::log(a), 1e-10);
    }
}

TEST(FitModel, LinearTrendIsReproduced) {
    const Dataset base = testing::random_dataset(Domain::unit(1, 1), 8, 11);
    Vector y(8);
    for (Index i = 0; i < 8; ++i) {
        y[i] = 1.0 + 2.0 * base.points()(i, 0) - 3.0 * base.points()(i, 1);
    }
    const Dataset data(base.domain(), base.points(), y);
    const auto model = gp::fit_model(data);
    EXPECT_LT(model.sigma2(), 1e-12);
    for (double s : {0.05, 0.33, 0.8}) {
        for (double t : {0.12, 0.5, 0.97}) {
            EXPECT_NEAR(model.mean(vec({s, t})), 1.0 + 2.0 * s - 3.0 * t, 1e-6);
        }
    }
}

TEST(FitModel, FixedThetaEqualsClosedForm) {
    const Dataset data = four_point_data();
    gp::FitConfig config;
    config.optimize = false;
    config.fixed_theta = vec({1.5, 0.8});
    const auto model = gp::fit_model(data, config);
    const auto est = gp::fit_gls(data, {config.fixed_theta});
    EXPECT_EQ(model.theta().theta, config.fixed_theta);
    EXPECT_EQ(model.beta(), est.beta);
    EXPECT_EQ(model.sigma2(), est.sigma2);
    EXPECT_EQ(model.q2(), est.q2);
    EXPECT_EQ(model.negloglik(), gp::profile_negloglik(data, {config.fixed_theta}));
}

TEST(FitModel, BeatsReferenceThetaGrid) {
    const Dataset data = testing::random_dataset(Domain::unit(1, 1), 10, 21);
    const auto model = gp::fit_model(data);
    double grid_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double li = -3.0 + 6.0 * i / 19.0;
            const double lj = -3.0 + 6.0 * j / 19.0;
            try {
                grid_best = std::min(grid_best,
                                     gp::profile_negloglik(data, {vec({std::pow(10.0, li), std::pow(10.0, lj)})}));
            } catch (const FactorizationError&) {
            }
        }
    }
    EXPECT_LE(model.negloglik(), grid_best + 1e-9 * (1.0 + std::abs(grid_best)));
    for (Index k = 0; k < 2; ++k) {
        EXPECT_GE(model.theta().theta[k], 1e-3 * (1 - 1e-12));
        EXPECT_LE(model.theta().theta[k], 1e3 * (1 + 1e-12));
    }
}

TEST(FitModel, RejectsBadBounds) {
    gp::FitConfig config;
    config.theta_min = 10.0;
    config.theta_max = 1.0;
    EXPECT_THROW(gp::fit_model(four_point_data(), config), ConfigError);
}

TEST(Predict, InterpolatesTrainingPoints) {
    const Dataset data = testing::random_dataset(Domain::unit(2, 1), 12, 5);
    const auto model = gp::fit_model(data);
    const double sd_tol = 1e-6 * std::sqrt(model.q2() / model.dof() + 1.0);
    for (Index i = 0; i < data.n(); ++i) {
        const auto pred = model.predict(data.points().row(i).transpose(), 0.2);
        const double y = data.responses()[i];
        EXPECT_NEAR(pred.mean, y, 1e-6 * (1.0 + std::abs(y)));
        EXPECT_LE(pred.sd, sd_tol);
        EXPECT_GE(pred.sd, 0.0);
        EXPECT_NEAR(pred.lower, y, 1e-6 * (1.0 + std::abs(y)));
    }
}

TEST(Predict, AlphaOneGivesMean) {
    const auto model = gp::GpModel::at_theta(four_point_data(), {vec({1.5, 0.8})});
    const auto pred = model.predict(vec({0.55, 0.45}), 1.0);
    EXPECT_EQ(model.t_quantile(1.0), 0.0);
    EXPECT_EQ(pred.lower, pred.mean);
    EXPECT_GT(pred.sd, 0.0);
}

TEST(Predict, FourPointsMatchFrozenOracle) {
    const auto model = gp::GpModel::at_theta(four_point_data(), {vec({1.5, 0.8})});
    EXPECT_EQ(model.dof(), 2.0);
    const auto pred = model.predict(vec({0.55, 0.45}), 0.5);
    EXPECT_NEAR(pred.mean, 1.4344859499341464, 1e-9);
    EXPECT_NEAR(pred.sd, 0.14454609873396629, 1e-9);
    // Student t with 2 dof: upper 0.25 quantile is sqrt(2/3).
    EXPECT_NEAR(model.t_quantile(0.5), std::sqrt(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(pred.lower, 1.4344859499341464 - 0.14454609873396629 * std::sqrt(2.0 / 3.0), 1e-9);
    EXPECT_FALSE(pred.outside_domain);
    EXPECT_FALSE(pred.negative_variance);
}

TEST(Predict, DofRuleOverride) {
    const auto model =
        gp::GpModel::at_theta(five_point_data(), {vec({2.0, 3.0})}, gp::DofRule::kPointsMinusRegressors);
    EXPECT_EQ(model.dof(), 2.0);
    EXPECT_EQ(gp::GpModel::at_theta(five_point_data(), {vec({2.0, 3.0})}).dof(), 3.0);
}

TEST(Predict, FlagsPointsOutsideDomain) {
    const auto model = gp::GpModel::at_theta(four_point_data(), {vec({1.5, 0.8})});
    EXPECT_TRUE(model.predict(vec({1.5, 0.5}), 0.5).outside_domain);
    EXPECT_THROW((void)model.predict(vec({0.5}), 0.5), DimensionError);
    EXPECT_THROW((void)model.predict(vec({0.5, 0.5}), 0.0), DomainError);
}

TEST(Predict, InvariantsHoldOnRandomInputs) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(-0.2, 1.2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto model = gp::fit_model(testing::random_dataset(Domain::unit(1, 2), 9, seed));
        EXPECT_GE(model.sigma2(), 0.0);
        EXPECT_GE(model.q2(), 0.0);
        const Matrix rebuilt = model.chol_lower() * model.chol_lower().transpose();
        EXPECT_NEAR(rebuilt(0, 0), 1.0 + model.nugget(), 1e-12);
        for (int k = 0; k < 50; ++k) {
            const auto pred = model.predict(vec({unif(rng), unif(rng), unif(rng)}), 0.3);
            EXPECT_GE(pred.sd, 0.0);
            EXPECT_NEAR(pred.lower, pred.mean - pred.sd * model.t_quantile(0.3), 1e-12 * (1 + std::abs(pred.mean)));
        }
    }
}

TEST(Predict, AffineEquivarianceAtFixedTheta) {
    const Dataset data = testing::random_dataset(Domain::unit(1, 1), 10, 17);
    const gp::CorrelationParams theta{vec({6.0, 2.5})};
    const double a = 3.7;
    const double b = -2.2;
    const Dataset moved(data.domain(), data.points(), (a * data.responses().array() + b).matrix());
    const auto m1 = gp::GpModel::at_theta(data, theta);
    const auto m2 = gp::GpModel::at_theta(moved, theta);
    Index best1 = 0;
    Index best2 = 0;
    double low1 = std::numeric_limits<double>::infinity();
    double low2 = low1;
    for (Index i = 0; i < 41; ++i) {
        for (Index j = 0; j < 41; ++j) {
            const Vector x = vec({i / 40.0, j / 40.0});
            const auto p1 = m1.predict(x, 0.5);
            const auto p2 = m2.predict(x, 0.5);
            EXPECT_NEAR(p2.mean, a * p1.mean + b, 1e-9 * (1 + std::abs(p2.mean)));
            EXPECT_NEAR(p2.sd, a * p1.sd, 1e-9 * (1 + p2.sd));
            if (p1.lower < low1) {
                low1 = p1.lower;
                best1 = i * 41 + j;
            }
            if (p2.lower < low2) {
                low2 = p2.lower;
                best2 = i * 41 + j;
            }
        }
    }
    EXPECT_EQ(best1, best2);
}

TEST(Predict, PermutationSymmetry) {
    const Dataset data = testing::random_dataset(Domain::unit(1, 1), 10, 23);
    const gp::CorrelationParams theta{vec({5.0, 3.0})};
    const Matrix xr = data.points().colwise().reverse();
    const Vector yr = data.responses().reverse();
    const auto m1 = gp::GpModel::at_theta(data, theta);
    const auto m2 = gp::GpModel::at_theta(Dataset(data.domain(), xr, yr), theta);
    for (int k = 0; k < 30; ++k) {
        const Vector x = vec({(k % 6) / 5.0, (k / 6) / 4.0});
        const auto p1 = m1.predict(x, 0.5);
        const auto p2 = m2.predict(x, 0.5);
        EXPECT_NEAR(p1.mean, p2.mean, 1e-10);
        EXPECT_NEAR(p1.sd, p2.sd, 1e-10);
        EXPECT_NEAR(p1.lower, p2.lower, 1e-10);
    }
}

TEST(Predict, MatchesDenseOracleOnSmallInstances) {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Index n = 5 + static_cast<Index>(seed % 4);
        const Dataset data = testing::random_dataset(Domain::unit(1, 1 + seed % 2), n, 1000 + seed);
        Vector theta(data.d());
        for (Index k = 0; k < theta.size(); ++k) {
            theta[k] = 0.5 + 19.5 * unif(rng);
        }
        const auto model = gp::GpModel::at_theta(data, {theta});
        const auto o = dense_oracle(data, theta, model.nugget());
        for (Index k = 0; k < model.beta().size(); ++k) {
            EXPECT_LT(rel_err(model.beta()[k], o.beta[k]), 1e-8);
        }
        EXPECT_LT(rel_err(model.sigma2(), o.sigma2), 1e-8);
        EXPECT_LT(rel_err(model.negloglik(), o.negloglik), 1e-8);
        for (int r = 0; r < 5; ++r) {
            Vector x0(data.d());
            for (Index k = 0; k < x0.size(); ++k) {
                x0[k] = unif(rng);
            }
            const auto pred = model.predict(x0, 0.4);
            const oracle::LVector lx0 = x0.cast<long double>();
            const long double sd = std::sqrt(std::max(0.0L, o.variance(lx0)));
            EXPECT_LT(rel_err(pred.mean, o.mean(lx0)), 1e-8);
            EXPECT_LT(rel_err(pred.sd, sd), 1e-8);
            EXPECT_LT(rel_err(pred.lower, o.mean(lx0) - sd * model.t_quantile(0.4)), 1e-8);
        }
    }
}

// Draws training and test responses jointly from a GP with known parameters
// and counts how often the prediction interval covers the held-out truth.
TEST(Predict, IntervalCoverageOnSimulatedProcess) {
    const Index n_train = 30;
    const Index n_test = 50;
    const int datasets = 40;
    const Vector theta = vec({10.0, 10.0});
    const Vector beta = vec({1.0, 2.0, -1.0});
    const double sigma2 = 4.0;
    const Domain domain = Domain::unit(1, 1);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (double alpha : {0.1, 0.5}) {
        int covered = 0;
        int total = 0;
        for (int rep = 0; rep < datasets; ++rep) {
            const Dataset train_points = testing::random_dataset(domain, n_train, 50'000 + rep);
            Matrix x(n_train + n_test, 2);
            x.topRows(n_train) = train_points.points();
            for (Index i = n_train; i < x.rows(); ++i) {
                x.row(i) << unif(rng), unif(rng);
            }
            Matrix cov(x.rows(), x.rows());
            for (Index i = 0; i < x.rows(); ++i) {
                for (Index j = 0; j < x.rows(); ++j) {
                    const Vector u = (x.row(i) - x.row(j)).transpose();
                    cov(i, j) = sigma2 * gp::gaussian_correlation(u, {theta});
                }
                cov(i, i) += 1e-9;
            }
            const Eigen::LLT<Matrix> llt(cov);
            ASSERT_EQ(llt.info(), Eigen::Success);
            Vector z(x.rows());
            for (Index i = 0; i < z.size(); ++i) {
                z[i] = normal(rng);
            }
            const Vector y = gp::regressors(x) * beta + llt.matrixL() * z;
            const Dataset train(domain, x.topRows(n_train), y.head(n_train));
            const auto model = gp::GpModel::at_theta(train, {theta});
            const double q = model.t_quantile(alpha);
            for (Index i = n_train; i < x.rows(); ++i) {
                const auto pred = model.predict(x.row(i).transpose(), alpha);
                covered += std::abs(y[i] - pred.mean) <= q * pred.sd ? 1 : 0;
                ++total;
            }
        }
        ASSERT_GE(total, 2000);
        EXPECT_NEAR(static_cast<double>(covered) / total, 1.0 - alpha, 0.05) << "alpha " << alpha;
    }
}

}  // namespace
}  // namespace persopt
