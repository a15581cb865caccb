#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include "fraudbench/features.hpp"

namespace fraudbench {

/// Normal density with mean mu and standard deviation sigma.
inline double gaussian_density(double x, double mu, double sigma)
{
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

/// Gaussian naive Bayes on raw features. Row 0 of mean/var is the clean
/// class, row 1 fraud.
struct GaussianNB {
    static constexpr double kVarSmoothing = 1e-9;

    Eigen::Matrix<double, 2, Eigen::Dynamic> mean;
    Eigen::Matrix<double, 2, Eigen::Dynamic> var;
    std::array<double, 2> log_prior{};
    double epsilon = 0.0;

    static GaussianNB fit(const FeatureMatrix& x, std::span<const Label> y)
    {
        GaussianNB m;
        const auto d = x.cols();
        m.mean = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d);
        m.var = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d);
        std::array<double, 2> count{};
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const int c = is_fraud(y[static_cast<std::size_t>(i)]) ? 1 : 0;
            m.mean.row(c) += x.row(i);
            count[c] += 1.0;
        }
        for (int c = 0; c < 2; ++c)
            m.mean.row(c) /= count[c];
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const int c = is_fraud(y[static_cast<std::size_t>(i)]) ? 1 : 0;
            m.var.row(c).array() += (x.row(i) - m.mean.row(c)).array().square();
        }
        for (int c = 0; c < 2; ++c)
            m.var.row(c) /= count[c];

        double max_var = 0.0;
        const Eigen::RowVectorXd overall = x.colwise().mean();
        for (Eigen::Index j = 0; j < d; ++j)
            max_var = std::max(max_var, (x.col(j).array() - overall(j)).square().sum() / static_cast<double>(x.rows()));
        m.epsilon = kVarSmoothing * (max_var > 0.0 ? max_var : 1.0);
        m.var.array() += m.epsilon;

        const double n = count[0] + count[1];
        m.log_prior = {std::log(count[0] / n), std::log(count[1] / n)};
        return m;
    }

    /// log P(c) + sum_j log f(x_j | mu_cj, sigma_cj)
    std::array<double, 2> joint_log_likelihood(std::span<const double> row) const
    {
        std::array<double, 2> out{};
        for (int c = 0; c < 2; ++c) {
            double s = log_prior[static_cast<std::size_t>(c)];
            for (Eigen::Index j = 0; j < mean.cols(); ++j) {
                const double v = var(c, j);
                const double dlt = row[static_cast<std::size_t>(j)] - mean(c, j);
                s -= 0.5 * std::log(2.0 * std::numbers::pi * v) + dlt * dlt / (2.0 * v);
            }
            out[static_cast<std::size_t>(c)] = s;
        }
        return out;
    }

    /// Normalized class posteriors {P(clean|x), P(fraud|x)}.
    std::array<double, 2> posteriors(std::span<const double> row) const
    {
        const auto l = joint_log_likelihood(row);
        const double hi = std::max(l[0], l[1]);
        const double e0 = std::exp(l[0] - hi);
        const double e1 = std::exp(l[1] - hi);
        const double z = e0 + e1;
        return {e0 / z, e1 / z};
    }

    double score(std::span<const double> row) const { return posteriors(row)[1]; }
};

}  // namespace fraudbench
