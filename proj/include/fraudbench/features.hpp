#pragma once

// Feature matrices and z-score standardization shared by the classifiers.
// Models see V1..V28 followed by Amount; Time is never a model input.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "fraudbench/core.hpp"

namespace fraudbench {

inline constexpr std::size_t kModelFeatureCount = kFeatureCount + 1;

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FeatureVector = Eigen::VectorXd;

inline void fill_features(const Transaction& t, std::span<double> out)
{
    for (std::size_t j = 0; j < kFeatureCount; ++j)
        out[j] = t.features[j];
    out[kFeatureCount] = t.amount;
}

inline FeatureMatrix feature_matrix(std::span<const Transaction> records)
{
    FeatureMatrix x(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(kModelFeatureCount));
    for (std::size_t i = 0; i < records.size(); ++i)
        fill_features(records[i], std::span<double>(x.row(static_cast<Eigen::Index>(i)).data(), kModelFeatureCount));
    return x;
}

inline std::vector<Label> labels_of(std::span<const Transaction> records)
{
    std::vector<Label> y(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        y[i] = records[i].label;
    return y;
}

/// Per-column z-score with training-set statistics. Constant columns get
/// scale 1 so they standardize to exactly zero.
struct Standardizer {
    FeatureVector mean;
    FeatureVector scale;

    static Standardizer fit(const FeatureMatrix& x)
    {
        Standardizer s;
        const auto n = static_cast<double>(x.rows());
        s.mean = x.colwise().mean().transpose();
        s.scale.resize(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
            s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
        }
        return s;
    }

    FeatureMatrix apply(const FeatureMatrix& x) const
    {
        FeatureMatrix z = x;
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            z.col(j) = (x.col(j).array() - mean(j)) / scale(j);
        return z;
    }

    FeatureVector apply(std::span<const double> row) const
    {
        FeatureVector z(mean.size());
        for (Eigen::Index j = 0; j < mean.size(); ++j)
            z(j) = (row[static_cast<std::size_t>(j)] - mean(j)) / scale(j);
        return z;
    }
};

inline void require_finite(std::span<const double> row)
{
    for (double v : row)
        if (!std::isfinite(v))
            throw InputError("non-finite feature value");
}

}  // namespace fraudbench
