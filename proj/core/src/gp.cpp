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

#include "persopt/gp.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "persopt/inner_opt.hpp"

namespace persopt::gp {
namespace {

// sigma2 below this fraction of the mean squared response is rounding noise.
constexpr double kRelativeSigma2Floor = 1e-24;
constexpr double kRankThreshold = 1e-10;

// Everything the closed-form estimates need, for one theta.
struct GlsCore {
    CorrelationFactor factor;
    Matrix g;           // G
    Matrix whitened_g;  // L^-1 G
    Matrix trend_chol;  // upper U, U'U = G'R^-1 G
    Vector beta;
    Vector whitened_residual;  // L^-1 (y - G beta)
    double q2 = 0.0;
    double response_scale = 0.0;  // mean of y_i^2
};

GlsCore solve_gls(const Dataset& data, const CorrelationParams& params, double nugget_per_point) {
    data.require_fittable();
    params.validate(data.d());
    const Index n = data.n();
    const Index m = data.d() + 1;
    if (n <= m) {
        throw RankDeficientError("GLS fit needs more runs (" + std::to_string(n) +
                                 ") than regressors (" + std::to_string(m) + ")");
    }

    GlsCore core;
    core.factor = build_correlation_matrix(data.points(), params, nugget_per_point * static_cast<double>(n));
    const auto lower = core.factor.lower.triangularView<Eigen::Lower>();
    core.g = regressors(data.points());
    core.whitened_g = lower.solve(core.g);
    const Vector whitened_y = lower.solve(data.responses());

    Eigen::ColPivHouseholderQR<Matrix> pivoted(core.whitened_g);
    pivoted.setThreshold(kRankThreshold);
    if (pivoted.rank() < m) {
        throw RankDeficientError("regressor matrix G is rank deficient (degenerate design)");
    }
    const Eigen::HouseholderQR<Matrix> qr = core.whitened_g.householderQr();
    core.trend_chol = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    core.beta = qr.solve(whitened_y);
    core.whitened_residual = whitened_y - core.whitened_g * core.beta;
    core.q2 = core.whitened_residual.squaredNorm();
    core.response_scale = data.responses().squaredNorm() / static_cast<double>(n);
    return core;
}

double negloglik_from(const GlsCore& core, Index n) {
    const double sigma2 = core.q2 / static_cast<double>(n);
    if (!(sigma2 > kRelativeSigma2Floor * core.response_scale) || !(sigma2 > 0.0)) {
        return kDegenerateLikelihood;
    }
    return static_cast<double>(n) * std::log(sigma2) + core.factor.log_det;
}

}  // namespace

void CorrelationParams::validate(Index d) const {
    if (theta.size() != d) {
        throw DimensionError("theta has " + std::to_string(theta.size()) + " entries, expected " +
                             std::to_string(d));
    }
    for (Index i = 0; i < theta.size(); ++i) {
        if (!(theta[i] > 0.0) || !std::isfinite(theta[i])) {
            throw DomainError("correlation parameters must be positive and finite");
        }
    }
}

double gaussian_correlation(const Vector& u, const CorrelationParams& params) {
    params.validate(u.size());
    return std::exp(-(params.theta.array() * u.array().square()).sum());
}

Matrix regressors(const Matrix& points) {
    Matrix g(points.rows(), points.cols() + 1);
    g.col(0).setOnes();
    g.rightCols(points.cols()) = points;
    return g;
}

CorrelationFactor build_correlation_matrix(const Matrix& points, const CorrelationParams& params,
                                           double nugget) {
    const Index n = points.rows();
    const Index d = points.cols();
    if (n < 2) {
        throw DimensionError("correlation matrix needs at least two points");
    }
    params.validate(d);
    if (!(nugget >= 0.0)) {
        throw DomainError("nugget must be nonnegative");
    }

    const Vector range = (points.colwise().maxCoeff() - points.colwise().minCoeff()).transpose();
    Matrix r(n, n);
    for (Index i = 0; i < n; ++i) {
        r(i, i) = 1.0;
        for (Index j = 0; j < i; ++j) {
            double exponent = 0.0;
            bool duplicate = true;
            for (Index k = 0; k < d; ++k) {
                const double u = points(i, k) - points(j, k);
                exponent += params.theta[k] * u * u;
                duplicate = duplicate && std::abs(u) <= kDuplicateTolerance * std::max(1.0, range[k]);
            }
            if (duplicate) {
                throw FactorizationError("correlation matrix is singular: rows " + std::to_string(j) +
                                         " and " + std::to_string(i) + " are duplicate points");
            }
            r(i, j) = std::exp(-exponent);
            r(j, i) = r(i, j);
        }
    }

    double delta = nugget;
    while (true) {
        Matrix a = r;
        a.diagonal().array() += delta;
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() == Eigen::Success) {
            CorrelationFactor factor;
            factor.lower = llt.matrixL();
            const auto diag = factor.lower.diagonal();
            if ((diag.array() > 0.0).all() && diag.allFinite()) {
                factor.nugget = delta;
                factor.log_det = 2.0 * diag.array().log().sum();
                return factor;
            }
        }
        if (delta >= kMaxNugget) {
            break;
        }
        delta = delta > 0.0 ? std::min(delta * 10.0, kMaxNugget) : kMaxNugget * 1e-4;
    }
    throw FactorizationError("correlation matrix factorization failed up to nugget " +
                             std::to_string(kMaxNugget));
}

GlsEstimate fit_gls(const Dataset& data, const CorrelationParams& params, double nugget_per_point) {
    const GlsCore core = solve_gls(data, params, nugget_per_point);
    return {core.beta, core.q2 / static_cast<double>(data.n()), core.q2};
}

double profile_negloglik(const Dataset& data, const CorrelationParams& params, double nugget_per_point) {
    return negloglik_from(solve_gls(data, params, nugget_per_point), data.n());
}

GpModel GpModel::at_theta(Dataset data, const CorrelationParams& params, DofRule dof,
                          double nugget_per_point) {
    GlsCore core = solve_gls(data, params, nugget_per_point);
    const Index n = data.n();

    GpModel model;
    model.theta_ = params;
    model.negloglik_ = negloglik_from(core, n);
    model.factor_ = std::move(core.factor);
    model.regressors_ = std::move(core.g);
    model.whitened_regressors_ = std::move(core.whitened_g);
    model.trend_chol_ = std::move(core.trend_chol);
    model.beta_ = std::move(core.beta);
    model.weights_ = model.factor_.lower.triangularView<Eigen::Lower>().transpose().solve(core.whitened_residual);
    model.q2_ = core.q2;
    model.sigma2_ = core.q2 / static_cast<double>(n);
    const Index m = data.d() + 1;
    model.dof_ = static_cast<double>(dof == DofRule::kPointsMinusDims ? n - data.d() : n - m);
    if (!(model.dof_ >= 1.0)) {
        throw RankDeficientError("not enough runs for a positive number of degrees of freedom");
    }
    model.data_ = std::move(data);
    return model;
}

double GpModel::correlation_vector(const Vector& x0, Vector& r0) const {
    const Matrix& x = data_.points();
    const Index n = x.rows();
    const Index d = x.cols();
    if (x0.size() != d) {
        throw DimensionError("prediction point has the wrong dimension");
    }
    r0.resize(n);
    double prior = 1.0;
    for (Index i = 0; i < n; ++i) {
        double exponent = 0.0;
        bool same = true;
        for (Index k = 0; k < d; ++k) {
            const double u = x0[k] - x(i, k);
            exponent += theta_.theta[k] * u * u;
            same = same && u == 0.0;
        }
        r0[i] = std::exp(-exponent);
        if (same) {
            // The nugget belongs to the diagonal of R; on an exact training
            // point it keeps the predictor interpolating.
            r0[i] += factor_.nugget;
            prior += factor_.nugget;
        }
    }
    return prior;
}

double GpModel::mean(const Vector& x0) const {
    Vector r0;
    correlation_vector(x0, r0);
    return beta_[0] + x0.dot(beta_.tail(x0.size())) + r0.dot(weights_);
}

double GpModel::variance(const Vector& x0) const {
    const double sd = predict(x0, 1.0).sd;
    return sd * sd;
}

Prediction GpModel::predict(const Vector& x0, double alpha) const {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("alpha must lie in (0, 1]");
    }
    Vector r0;
    const double prior = correlation_vector(x0, r0);

    Prediction out;
    out.mean = beta_[0] + x0.dot(beta_.tail(x0.size())) + r0.dot(weights_);

    // 1 - (g', r0') [[0, G'], [G, R]]^-1 (g; r0)
    //   = 1 - r0'R^-1 r0 + (g - G'R^-1 r0)'(G'R^-1 G)^-1 (g - G'R^-1 r0)
    const Vector rt = factor_.lower.triangularView<Eigen::Lower>().solve(r0);
    Vector u(x0.size() + 1);
    u[0] = 1.0;
    u.tail(x0.size()) = x0;
    u -= whitened_regressors_.transpose() * rt;
    const Vector v = trend_chol_.triangularView<Eigen::Upper>().transpose().solve(u);
    const double raw = q2_ / dof_ * (prior - rt.squaredNorm() + v.squaredNorm());

    out.negative_variance = raw < -1e-8 * q2_;
    out.sd = std::sqrt(std::max(raw, 0.0));
    out.lower = out.mean - out.sd * t_quantile(alpha);
    out.outside_domain = !data_.domain().joint().contains(x0);
    return out;
}

double GpModel::t_quantile(double alpha) const {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("alpha must lie in (0, 1]");
    }
    if (alpha == 1.0) {
        return 0.0;
    }
    const boost::math::students_t dist(dof_);
    return boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
}

GpModel fit_model(const Dataset& data, const FitConfig& config) {
    data.require_fittable();
    const Index d = data.d();
    if (!config.optimize) {
        return GpModel::at_theta(data, CorrelationParams{config.fixed_theta}, config.dof,
                                 config.nugget_per_point);
    }
    if (!(config.theta_min > 0.0 && config.theta_min < config.theta_max)) {
        throw ConfigError("theta bounds must satisfy 0 < theta_min < theta_max");
    }

    opt::SearchSpec spec;
    spec.box = Box{Vector::Constant(d, std::log(config.theta_min)), Vector::Constant(d, std::log(config.theta_max))};
    spec.candidates = std::max(1, config.starts_per_dim * static_cast<int>(d));
    spec.max_iterations = config.polish_iterations;
    spec.x_tolerance = config.log_theta_tolerance;
    spec.seed = config.seed;
    for (const Vector& warm : config.warm_starts) {
        if (warm.size() == d && (warm.array() > 0.0).all()) {
            spec.extra_starts.push_back(warm.array().log().matrix());
        }
    }
    spec.polish_top_k = config.polish_starts < 0
                            ? spec.candidates + static_cast<int>(spec.extra_starts.size())
                            : config.polish_starts;

    const auto objective = [&](const Vector& log_theta) {
        try {
            return profile_negloglik(data, CorrelationParams{log_theta.array().exp().matrix()},
                                     config.nugget_per_point);
        } catch (const FactorizationError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    opt::OptResult best;
    try {
        best = opt::minimize(objective, spec);
    } catch (const opt::NoFiniteValueError&) {
        throw FactorizationError("every theta start failed to factorize the correlation matrix");
    }
    return GpModel::at_theta(data, CorrelationParams{best.x.array().exp().matrix()}, config.dof,
                             config.nugget_per_point);
}

}  // namespace persopt::gp
