#pragma once

// Alternating search over sample designs and classifier parameters.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fraudbench/classifiers.hpp"
#include "fraudbench/harness.hpp"
#include "fraudbench/sampling.hpp"

namespace fraudbench {

/// Mean fraud cost of each classifier trained under `sample`, in input order.
using CostEvaluator = std::function<std::vector<double>(const SampleSpec& sample, std::span<const ClassifierSpec>)>;

struct SearchGrid {
    std::vector<SampleSpec> samples;
    std::vector<ClassifierSpec> params;    // candidate settings, all kinds mixed
    std::vector<ClassifierSpec> defaults;  // starting setting per kind
    std::size_t round_cap = 5;
    double drop_factor = 10.0;
};

inline void validate(const SearchGrid& g)
{
    if (g.samples.empty())
        throw ParameterError("search sample grid is empty");
    if (g.params.empty())
        throw ParameterError("search parameter grid is empty");
    if (g.round_cap < 1)
        throw ParameterError("round_cap must be >= 1");
    if (!(g.drop_factor > 0.0))
        throw ParameterError("drop_factor must be positive");
    for (const auto& c : g.params)
        validate(c);
    for (const auto& c : g.defaults)
        validate(c);
}

struct SearchRound {
    std::vector<double> sample_scores;  // phase a: mean over active kinds, per grid sample
    std::size_t sample_index = 0;
    std::vector<ClassifierSpec> params;  // phase b winners, one per active kind
    std::vector<ModelKind> dropped;      // dropped after this round's phase a
};

struct SearchResult {
    SampleSpec sample;
    std::vector<ClassifierSpec> params;
    std::vector<ModelKind> dropped;
    bool converged = false;
    std::vector<SearchRound> rounds;
};

/// SMOTE sizes 1000..10000 at ratios 0.1..0.5, plus undersampling at 0.1..0.5.
inline std::vector<SampleSpec> tuning_sample_grid()
{
    const double ratios[] = {0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<SampleSpec> out;
    for (std::size_t n : {1000u, 2000u, 3000u, 5000u, 10000u})
        for (double r : ratios)
            out.push_back({SampleMethod::smote, n, r});
    for (double r : ratios)
        out.push_back({SampleMethod::undersample, 0, r});
    return out;
}

inline std::vector<ClassifierSpec> tuning_param_grid()
{
    std::vector<ClassifierSpec> out;
    for (ModelKind k : {ModelKind::LOG, ModelKind::SVC})
        for (Penalty p : {Penalty::l1, Penalty::l2})
            for (double c : {0.5, 1.0, 5.0, 10.0, 20.0})
                out.push_back({k, p, c});
    for (std::size_t t = 10; t <= 100; t += 10)
        out.push_back({ModelKind::RF, Penalty::l2, 1.0, t});
    for (std::size_t k = 10; k <= 100; k += 10)
        out.push_back({ModelKind::KNN, Penalty::l2, 1.0, 10, k});
    out.push_back({ModelKind::GNB});
    return out;
}

/// LOG(l2,1), SVC(l2,1), RF(10), KNN(5), GNB.
inline std::vector<ClassifierSpec> library_defaults()
{
    return {{ModelKind::LOG, Penalty::l2, 1.0},
            {ModelKind::SVC, Penalty::l2, 1.0},
            {ModelKind::RF, Penalty::l2, 1.0, 10},
            {ModelKind::KNN, Penalty::l2, 1.0, 10, 5},
            {ModelKind::GNB}};
}

namespace detail {

inline double median(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline bool same_params(const std::vector<ClassifierSpec>& a, const std::vector<ClassifierSpec>& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].same_design(b[i]))
            return false;
    return true;
}

}  // namespace detail

/// A kind is dropped when, for every sampling method in the grid, its mean cost
/// is positive and at least drop_factor times the magnitude of that method's
/// median cost. At least one kind always survives.
inline std::vector<ModelKind> outlier_kinds(const std::vector<SampleSpec>& samples,
                                            const std::vector<std::vector<double>>& costs,  // [sample][kind]
                                            const std::vector<ModelKind>& kinds, double factor)
{
    std::map<SampleMethod, std::vector<std::size_t>> by_method;
    for (std::size_t s = 0; s < samples.size(); ++s)
        by_method[samples[s].method].push_back(s);

    std::vector<ModelKind> out;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        bool outlier = true;
        for (const auto& [method, idx] : by_method) {
            std::vector<double> all;
            double own = 0.0;
            for (auto s : idx) {
                all.insert(all.end(), costs[s].begin(), costs[s].end());
                own += costs[s][k];
            }
            own /= static_cast<double>(idx.size());
            const double med = detail::median(all);
            if (!(own > 0.0 && own >= factor * std::abs(med)))
                outlier = false;
        }
        if (outlier)
            out.push_back(kinds[k]);
    }
    if (out.size() == kinds.size())
        out.clear();
    return out;
}

/// Phase a scores every sample under the current parameters and keeps the
/// cheapest; phase b tunes each kind independently under that sample. Stops
/// when phase b returns the parameters phase a used, or after round_cap rounds.
inline SearchResult bootstrap_search(const SearchGrid& grid, const CostEvaluator& evaluate)
{
    validate(grid);

    std::vector<ModelKind> kinds;
    std::map<ModelKind, std::vector<ClassifierSpec>> candidates;
    for (const auto& p : grid.params) {
        if (!candidates.count(p.kind))
            kinds.push_back(p.kind);
        candidates[p.kind].push_back(p);
    }
    std::vector<ClassifierSpec> current;
    for (ModelKind k : kinds) {
        auto it = std::find_if(grid.defaults.begin(), grid.defaults.end(),
                               [&](const ClassifierSpec& d) { return d.kind == k; });
        current.push_back(it != grid.defaults.end() ? *it : candidates[k].front());
    }

    SearchResult result;
    for (std::size_t round = 0; round < grid.round_cap; ++round) {
        SearchRound rec;

        std::vector<std::vector<double>> costs(grid.samples.size());
        for (std::size_t s = 0; s < grid.samples.size(); ++s) {
            costs[s] = evaluate(grid.samples[s], current);
            if (costs[s].size() != current.size())
                throw Error("evaluator returned " + std::to_string(costs[s].size()) + " costs for " +
                            std::to_string(current.size()) + " classifiers");
            double sum = 0.0;
            for (double c : costs[s])
                sum += c;
            rec.sample_scores.push_back(sum / static_cast<double>(costs[s].size()));
        }
        rec.sample_index = static_cast<std::size_t>(
            std::min_element(rec.sample_scores.begin(), rec.sample_scores.end()) - rec.sample_scores.begin());

        rec.dropped = outlier_kinds(grid.samples, costs, kinds, grid.drop_factor);
        std::vector<ModelKind> kept;
        std::vector<ClassifierSpec> used;
        for (std::size_t k = 0; k < kinds.size(); ++k)
            if (std::find(rec.dropped.begin(), rec.dropped.end(), kinds[k]) == rec.dropped.end()) {
                kept.push_back(kinds[k]);
                used.push_back(current[k]);
            }
        result.dropped.insert(result.dropped.end(), rec.dropped.begin(), rec.dropped.end());

        const SampleSpec& chosen = grid.samples[rec.sample_index];
        for (ModelKind k : kept) {
            const auto& cand = candidates[k];
            const auto c = evaluate(chosen, cand);
            if (c.size() != cand.size())
                throw Error("evaluator returned the wrong number of costs");
            rec.params.push_back(cand[static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin())]);
        }

        const bool stable = detail::same_params(rec.params, used);
        result.sample = chosen;
        result.params = rec.params;
        result.rounds.push_back(rec);
        kinds = kept;
        current = rec.params;
        if (stable) {
            result.converged = true;
            break;
        }
    }
    return result;
}

/// Evaluator backed by run_test: mean row cost per classifier over base.mc_iterations.
inline CostEvaluator monte_carlo_evaluator(const TestConfig& base, const Dataset& data, const LogSink& log = {})
{
    return [base, &data, log](const SampleSpec& sample, std::span<const ClassifierSpec> specs) {
        TestConfig cfg = base;
        cfg.samples = {sample};
        cfg.classifiers.assign(specs.begin(), specs.end());
        cfg.ensemble.reset();
        const RunResult r = run_test(cfg, data);
        std::vector<double> out;
        for (const auto& spec : specs) {
            const auto label = spec.label();
            auto it = std::find_if(r.master.combinations.begin(), r.master.combinations.end(),
                                   [&](const CombinationSummary& c) { return c.model == label; });
            out.push_back(it->cost.mean);
        }
        if (log)
            log(sample_label(sample) + " evaluated for " + std::to_string(specs.size()) + " classifiers");
        return out;
    };
}

}  // namespace fraudbench
