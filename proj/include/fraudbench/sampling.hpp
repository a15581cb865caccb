#pragma once

// Rebalanced training samples built from a sample pool. Every method routes
// the real records it does not use into `leftover`, which the harness adds to
// the evaluation set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fraudbench/core.hpp"

namespace fraudbench {

enum class SampleMethod { simple, undersample, smote };

inline std::string to_string(SampleMethod m)
{
    switch (m) {
    case SampleMethod::simple: return "simple";
    case SampleMethod::undersample: return "under";
    case SampleMethod::smote: return "smote";
    }
    return "?";
}

inline SampleMethod sample_method_from_string(const std::string& s)
{
    if (s == "simple") return SampleMethod::simple;
    if (s == "under" || s == "undersample") return SampleMethod::undersample;
    if (s == "smote") return SampleMethod::smote;
    throw ParameterError("unknown sample method: " + s);
}

struct SampleSpec {
    SampleMethod method = SampleMethod::undersample;
    std::size_t target_size = 0;  // ignored for undersample
    double fraud_ratio = 0.3;     // ignored for simple
    std::size_t k_neighbors = 5;  // smote only
    std::uint64_t seed = 0;

    /// Identity of the spec without its seed; used to group Monte Carlo rows.
    bool same_design(const SampleSpec& o) const noexcept
    {
        return method == o.method && target_size == o.target_size && fraud_ratio == o.fraud_ratio &&
               k_neighbors == o.k_neighbors;
    }
};

struct Sample {
    std::vector<Transaction> records;
    std::vector<bool> synthetic_flags;  // parallel to records
    double achieved_ratio = 0.0;
    std::vector<Transaction> leftover;

    std::size_t size() const noexcept { return records.size(); }
    std::size_t fraud_count() const noexcept
    {
        return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                      [](const Transaction& t) { return is_fraud(t.label); }));
    }
    std::size_t synthetic_count() const noexcept
    {
        return static_cast<std::size_t>(std::count(synthetic_flags.begin(), synthetic_flags.end(), true));
    }
};

namespace detail {

inline void finish(Sample& s)
{
    s.achieved_ratio = s.records.empty() ? 0.0
                                         : static_cast<double>(s.fraud_count()) / static_cast<double>(s.records.size());
}

inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_by_class(const Dataset& pool)
{
    std::vector<std::size_t> fraud, clean;
    for (std::size_t i = 0; i < pool.size(); ++i)
        (is_fraud(pool[i].label) ? fraud : clean).push_back(i);
    return {std::move(fraud), std::move(clean)};
}

/// Majority records: `take` drawn without replacement go to the sample, the rest to leftover.
inline void draw_majority(const Dataset& pool, const std::vector<std::size_t>& clean, std::size_t take, Rng& rng,
                          Sample& out)
{
    auto chosen = draw_without_replacement(clean.size(), take, rng);
    std::size_t c = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (c < chosen.size() && chosen[c] == i) {
            out.records.push_back(pool[clean[i]]);
            out.synthetic_flags.push_back(false);
            ++c;
        } else {
            out.leftover.push_back(pool[clean[i]]);
        }
    }
}

inline void check_ratio(double r)
{
    if (!(r > 0.0 && r < 1.0))
        throw ParameterError("fraud_ratio must lie in (0, 1)");
}

/// Majority count that pairs with f fraud records at ratio r.
inline std::size_t majority_for(std::size_t f, double r)
{
    return static_cast<std::size_t>(std::llround(static_cast<double>(f) * (1.0 - r) / r));
}

}  // namespace detail

/// Keeps every fraud record and draws round(f(1-r)/r) majority records.
inline Sample undersample(const Dataset& pool, double fraud_ratio, std::uint64_t seed)
{
    detail::check_ratio(fraud_ratio);
    auto [fraud, clean] = detail::split_by_class(pool);
    if (fraud.empty())
        throw InfeasibleError("undersample: pool has no fraud records");
    const std::size_t m = detail::majority_for(fraud.size(), fraud_ratio);
    if (m > clean.size())
        throw InfeasibleError("undersample: ratio " + std::to_string(fraud_ratio) + " needs " + std::to_string(m) +
                              " majority records, pool has " + std::to_string(clean.size()));
    Sample s;
    for (auto i : fraud) {
        s.records.push_back(pool[i]);
        s.synthetic_flags.push_back(false);
    }
    Rng rng(seed);
    detail::draw_majority(pool, clean, m, rng, s);
    detail::finish(s);
    return s;
}

// ---------------------------------------------------------------------------
// Neighbour search over the minority class

/// Euclidean distance over V1..V28 plus the amount divided by `amount_scale`.
inline double neighbor_distance_sq(const Transaction& a, const Transaction& b, double amount_scale) noexcept
{
    double d = 0.0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        const double x = a.features[j] - b.features[j];
        d += x * x;
    }
    const double x = (a.amount - b.amount) / amount_scale;
    return d + x * x;
}

/// Population standard deviation of amounts; 1 when degenerate.
inline double amount_scale(std::span<const Transaction> records)
{
    if (records.empty())
        return 1.0;
    double mean = 0.0;
    for (const auto& t : records)
        mean += t.amount;
    mean /= static_cast<double>(records.size());
    double var = 0.0;
    for (const auto& t : records)
        var += (t.amount - mean) * (t.amount - mean);
    var /= static_cast<double>(records.size());
    return var > 0.0 ? std::sqrt(var) : 1.0;
}

/// Indices into `minority` of the k nearest records to `query`, nearest first,
/// equal distances ordered by index. `skip` excludes one index (the query itself).
inline std::vector<std::size_t> nearest_indices(const Transaction& query, std::span<const Transaction> minority,
                                                std::size_t k, double scale,
                                                std::size_t skip = static_cast<std::size_t>(-1))
{
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(minority.size());
    for (std::size_t i = 0; i < minority.size(); ++i)
        if (i != skip)
            d.emplace_back(neighbor_distance_sq(query, minority[i], scale), i);
    if (k > d.size())
        throw ParameterError("knn: k=" + std::to_string(k) + " exceeds " + std::to_string(d.size()) +
                             " candidate records");
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i)
        out[i] = d[i].second;
    return out;
}

/// The k minority records closest to `record`. `minority` must not contain
/// `record`; the amount is z-scored over minority plus the query.
inline std::vector<Transaction> knn_minority(const Transaction& record, std::span<const Transaction> minority,
                                             std::size_t k)
{
    if (k > minority.size())
        throw ParameterError("knn_minority: k exceeds minority size");
    std::vector<Transaction> all(minority.begin(), minority.end());
    all.push_back(record);
    const double scale = amount_scale(all);
    std::vector<Transaction> out;
    for (auto i : nearest_indices(record, minority, k, scale))
        out.push_back(minority[i]);
    return out;
}

/// origin + c (neighbor - origin), coordinate-wise, for c in [0, 1).
inline Transaction smote_synthesize(const Transaction& origin, const Transaction& neighbor, double c)
{
    Transaction s;
    for (std::size_t j = 0; j < kFeatureCount; ++j)
        s.features[j] = std::lerp(origin.features[j], neighbor.features[j], c);
    s.amount = std::lerp(origin.amount, neighbor.amount, c);
    s.time = std::lerp(origin.time, neighbor.time, c);
    s.label = Label::fraud;
    return s;
}

/// Every real fraud record plus synthetic ones until the fraud count reaches
/// round(target_size * fraud_ratio); majority fills the rest of target_size.
/// When the pool already holds more fraud than that, no synthesis happens and
/// the majority count is chosen to keep the requested ratio instead.
inline Sample smote_sample(const Dataset& pool, const SampleSpec& spec)
{
    detail::check_ratio(spec.fraud_ratio);
    if (spec.k_neighbors < 1)
        throw ParameterError("smote: k_neighbors must be >= 1");
    auto [fraud_idx, clean] = detail::split_by_class(pool);
    if (fraud_idx.size() < spec.k_neighbors + 1)
        throw InfeasibleError("smote: pool has " + std::to_string(fraud_idx.size()) +
                              " fraud records, need k_neighbors + 1 = " + std::to_string(spec.k_neighbors + 1));

    std::vector<Transaction> real_fraud;
    real_fraud.reserve(fraud_idx.size());
    for (auto i : fraud_idx)
        real_fraud.push_back(pool[i]);

    const auto wanted = static_cast<std::size_t>(
        std::llround(static_cast<double>(spec.target_size) * spec.fraud_ratio));
    std::size_t majority = 0;
    std::size_t n_synthetic = 0;
    if (wanted <= real_fraud.size()) {
        majority = detail::majority_for(real_fraud.size(), spec.fraud_ratio);
    } else {
        n_synthetic = wanted - real_fraud.size();
        majority = spec.target_size - wanted;
    }
    if (majority > clean.size())
        throw InfeasibleError("smote: needs " + std::to_string(majority) + " majority records, pool has " +
                              std::to_string(clean.size()));

    Sample s;
    for (const auto& t : real_fraud) {
        s.records.push_back(t);
        s.synthetic_flags.push_back(false);
    }

    Rng rng(spec.seed);
    const double scale = amount_scale(real_fraud);
    std::vector<std::vector<std::size_t>> neighbors(real_fraud.size());
    for (std::size_t n = 0; n < n_synthetic; ++n) {
        const std::size_t o = rng.index(real_fraud.size());
        if (neighbors[o].empty())
            neighbors[o] = nearest_indices(real_fraud[o], real_fraud, spec.k_neighbors, scale, o);
        const std::size_t nb = neighbors[o][rng.index(spec.k_neighbors)];
        const double c = rng.uniform();
        s.records.push_back(smote_synthesize(real_fraud[o], real_fraud[nb], c));
        s.synthetic_flags.push_back(true);
    }

    detail::draw_majority(pool, clean, majority, rng, s);
    detail::finish(s);
    return s;
}

/// Uniform draw of target_size records without replacement.
inline Sample simple_sample(const Dataset& pool, std::size_t target_size, std::uint64_t seed)
{
    if (target_size > pool.size())
        throw ParameterError("simple_sample: target_size " + std::to_string(target_size) + " exceeds pool size " +
                             std::to_string(pool.size()));
    Rng rng(seed);
    auto chosen = draw_without_replacement(pool.size(), target_size, rng);
    Sample s;
    std::size_t c = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (c < chosen.size() && chosen[c] == i) {
            s.records.push_back(pool[i]);
            s.synthetic_flags.push_back(false);
            ++c;
        } else {
            s.leftover.push_back(pool[i]);
        }
    }
    detail::finish(s);
    return s;
}

inline Sample build_sample(const Dataset& pool, const SampleSpec& spec)
{
    switch (spec.method) {
    case SampleMethod::simple: return simple_sample(pool, spec.target_size, spec.seed);
    case SampleMethod::undersample: return undersample(pool, spec.fraud_ratio, spec.seed);
    case SampleMethod::smote: return smote_sample(pool, spec);
    }
    throw ParameterError("unknown sample method");
}

/// Debug dump: dataset schema plus a Synthetic 0/1 column.
inline void write_sample(std::ostream& out, const Sample& s)
{
    write_dataset(out, s.records, s.synthetic_flags, true);
}

}  // namespace fraudbench
