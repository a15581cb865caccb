#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "fraudbench/features.hpp"

namespace fraudbench {

/// k-nearest-neighbour vote over the standardized training sample.
/// Distance is Euclidean; equal distances are ordered by training index.
struct KNearest {
    Standardizer standardizer;
    FeatureMatrix points;
    std::vector<Label> labels;
    std::size_t k = 5;

    static KNearest fit(const FeatureMatrix& x, std::span<const Label> y, std::size_t k)
    {
        KNearest m;
        m.standardizer = Standardizer::fit(x);
        m.points = m.standardizer.apply(x);
        m.labels.assign(y.begin(), y.end());
        m.k = k;
        return m;
    }

    /// Indices of the k nearest training rows, nearest first.
    std::vector<std::size_t> neighbors(std::span<const double> row) const
    {
        const FeatureVector z = standardizer.apply(row);
        std::vector<std::pair<double, std::size_t>> d(static_cast<std::size_t>(points.rows()));
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            d[static_cast<std::size_t>(i)] = {(points.row(i).transpose() - z).squaredNorm(),
                                              static_cast<std::size_t>(i)};
        const auto kk = static_cast<std::ptrdiff_t>(k);
        std::nth_element(d.begin(), d.begin() + kk - 1, d.end());
        std::sort(d.begin(), d.begin() + kk);
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i)
            out[i] = d[i].second;
        return out;
    }

    /// Fraction of the k neighbours labelled fraud.
    double score(std::span<const double> row) const
    {
        std::size_t fraud = 0;
        for (auto i : neighbors(row))
            fraud += is_fraud(labels[i]) ? 1 : 0;
        return static_cast<double>(fraud) / static_cast<double>(k);
    }
};

}  // namespace fraudbench
