#pragma once

// Random forest of CART trees: bootstrap resamples, sqrt(d) candidate features
// per node, Gini splits, grown to purity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "fraudbench/features.hpp"
#include "fraudbench/random.hpp"

namespace fraudbench {

class DecisionTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        Label label = Label::clean;
    };

    DecisionTree() = default;
    explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    /// Grows a tree on the rows listed in `rows` (duplicates allowed).
    static DecisionTree grow(const FeatureMatrix& x, std::span<const Label> y, std::vector<std::size_t> rows,
                             Rng& rng);

    Label predict(std::span<const double> row) const
    {
        int i = 0;
        while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& n = nodes_[static_cast<std::size_t>(i)];
            i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(i)].label;
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;

private:
    std::vector<Node> nodes_;
};

namespace detail {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;  // sum over children of (f^2 + c^2) / n; larger is purer
};

/// Best Gini threshold on one feature; returns false if the feature is constant.
inline bool best_split_on(const FeatureMatrix& x, std::span<const Label> y, std::span<const std::size_t> rows,
                          int feature, std::vector<std::pair<double, int>>& buf, SplitCandidate& best)
{
    buf.clear();
    std::size_t total_fraud = 0;
    for (auto r : rows) {
        const int lab = is_fraud(y[r]) ? 1 : 0;
        buf.emplace_back(x(static_cast<Eigen::Index>(r), feature), lab);
        total_fraud += static_cast<std::size_t>(lab);
    }
    std::sort(buf.begin(), buf.end());
    if (buf.front().first == buf.back().first)
        return false;

    const double n = static_cast<double>(buf.size());
    const double f_total = static_cast<double>(total_fraud);
    double f_left = 0.0;
    for (std::size_t i = 0; i + 1 < buf.size(); ++i) {
        f_left += buf[i].second;
        if (buf[i].first == buf[i + 1].first)
            continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double cl = nl - f_left;
        const double fr = f_total - f_left;
        const double cr = nr - fr;
        const double score = (f_left * f_left + cl * cl) / nl + (fr * fr + cr * cr) / nr;
        if (score > best.score) {
            double thr = 0.5 * (buf[i].first + buf[i + 1].first);
            if (!(thr < buf[i + 1].first))
                thr = buf[i].first;
            best = {feature, thr, score};
        }
    }
    return true;
}

}  // namespace detail

inline DecisionTree DecisionTree::grow(const FeatureMatrix& x, std::span<const Label> y,
                                       std::vector<std::size_t> rows, Rng& rng)
{
    const auto d = static_cast<std::size_t>(x.cols());
    const std::size_t mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));

    struct Pending {
        int node;
        std::size_t begin, end;  // range in `rows`
    };
    std::vector<Node> nodes(1);
    std::vector<Pending> stack{{0, 0, rows.size()}};
    std::vector<std::size_t> features(d);
    std::vector<std::pair<double, int>> buf;

    while (!stack.empty()) {
        const Pending p = stack.back();
        stack.pop_back();
        const std::span<std::size_t> range(rows.data() + p.begin, p.end - p.begin);

        std::size_t n_fraud = 0;
        for (auto r : range)
            n_fraud += is_fraud(y[r]) ? 1 : 0;
        nodes[static_cast<std::size_t>(p.node)].label = 2 * n_fraud >= range.size() ? Label::fraud : Label::clean;
        if (n_fraud == 0 || n_fraud == range.size())
            continue;

        // Visit features in random order until mtry non-constant ones were scored.
        std::iota(features.begin(), features.end(), std::size_t{0});
        detail::SplitCandidate best;
        std::size_t scored = 0;
        for (std::size_t i = 0; i < d && scored < mtry; ++i) {
            std::swap(features[i], features[i + rng.index(d - i)]);
            if (detail::best_split_on(x, y, range, static_cast<int>(features[i]), buf, best))
                ++scored;
        }
        if (best.feature < 0)
            continue;  // every feature constant: impure leaf

        auto mid = std::partition(range.begin(), range.end(), [&](std::size_t r) {
            return x(static_cast<Eigen::Index>(r), best.feature) <= best.threshold;
        });
        const std::size_t split = p.begin + static_cast<std::size_t>(mid - range.begin());

        const int left = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes.emplace_back();
        auto& parent = nodes[static_cast<std::size_t>(p.node)];
        parent.feature = best.feature;
        parent.threshold = best.threshold;
        parent.left = left;
        parent.right = left + 1;
        stack.push_back({left + 1, split, p.end});
        stack.push_back({left, p.begin, split});
    }
    return DecisionTree(std::move(nodes));
}

inline std::size_t DecisionTree::depth() const
{
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [i, dep] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, dep);
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        if (n.feature >= 0) {
            stack.emplace_back(n.left, dep + 1);
            stack.emplace_back(n.right, dep + 1);
        }
    }
    return deepest;
}

struct RandomForest {
    std::vector<DecisionTree> trees;

    static RandomForest fit(const FeatureMatrix& x, std::span<const Label> y, std::size_t n_trees,
                            std::uint64_t seed)
    {
        RandomForest f;
        f.trees.reserve(n_trees);
        const auto n = static_cast<std::size_t>(x.rows());
        for (std::size_t t = 0; t < n_trees; ++t) {
            Rng rng(derive_seed(seed, {t}));
            std::vector<std::size_t> rows(n);
            for (auto& r : rows)
                r = rng.index(n);
            f.trees.push_back(DecisionTree::grow(x, y, std::move(rows), rng));
        }
        return f;
    }

    /// Fraction of trees voting fraud.
    double score(std::span<const double> row) const
    {
        std::size_t votes = 0;
        for (const auto& t : trees)
            votes += is_fraud(t.predict(row)) ? 1 : 0;
        return static_cast<double>(votes) / static_cast<double>(trees.size());
    }
};

}  // namespace fraudbench
