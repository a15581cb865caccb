#pragma once

// Weighted-average voting ensemble whose integer weights are evolved by a
// genetic algorithm. Each weight is a 40-bit gene; fitness is the fraud cost
// of the ensemble on a validation split (lower is better).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraudbench/classifiers.hpp"
#include "fraudbench/evaluation.hpp"
#include "fraudbench/random.hpp"

namespace fraudbench {

inline constexpr int kGeneBits = 40;
inline constexpr std::uint64_t kWeightLimit = std::uint64_t{1} << kGeneBits;  // weights lie in [1, 2^40)
inline constexpr std::uint64_t kGeneMask = kWeightLimit - 1;

struct Genome {
    std::vector<std::uint64_t> weights;

    std::size_t size() const noexcept { return weights.size(); }
    std::uint64_t total() const noexcept { return std::accumulate(weights.begin(), weights.end(), std::uint64_t{0}); }
    double normalized(std::size_t i) const { return static_cast<double>(weights[i]) / static_cast<double>(total()); }
    bool operator==(const Genome&) const = default;
};

struct Population {
    std::vector<Genome> genomes;
    std::vector<Money> fitnesses;  // parallel to genomes once evaluated
};

struct GAConfig {
    std::size_t population_size = 50;
    double mutation_rate = 0.001;  // per bit
    std::chrono::milliseconds time_budget{60'000};
    double w_max = 0.49;
    double train_fraction = 0.6;
    std::uint64_t seed = 0;
    /// When set, exactly this many generations run after the initial one and
    /// the clock is ignored. Gives bit-reproducible runs.
    std::optional<std::size_t> generations;
};

inline void validate(const GAConfig& cfg)
{
    if (cfg.population_size < 1)
        throw ParameterError("GA population_size must be >= 1");
    if (!(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0))
        throw ParameterError("GA mutation_rate must lie in [0, 1]");
    if (!(cfg.w_max > 0.0 && cfg.w_max < 1.0))
        throw ParameterError("GA w_max must lie in (0, 1)");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw ParameterError("GA train_fraction must lie in (0, 1)");
}

/// Weights drawn uniformly from [1, 2^40).
inline Population init_population(const GAConfig& cfg, std::size_t n_members)
{
    if (n_members < 2)
        throw ParameterError("ensemble needs at least two members");
    Rng rng(cfg.seed);
    Population p;
    p.genomes.resize(cfg.population_size);
    for (auto& g : p.genomes) {
        g.weights.resize(n_members);
        for (auto& w : g.weights)
            w = rng.between(1, kWeightLimit - 1);
    }
    return p;
}

/// Fitness (cost, lower is better) to selection probability:
///   f_p,i = f_i - f_min + 1
///   P(i)  = (f_p,max + 1 - f_p,i) / sum_j (f_p,max + 1 - f_p,j)
inline std::vector<double> selection_probabilities(std::span<const double> fitnesses)
{
    if (fitnesses.empty())
        throw InputError("selection_probabilities: empty fitness vector");
    for (double f : fitnesses)
        if (!std::isfinite(f))
            throw InputError("selection_probabilities: non-finite fitness");
    const double f_min = *std::min_element(fitnesses.begin(), fitnesses.end());
    std::vector<double> positive(fitnesses.size());
    for (std::size_t i = 0; i < fitnesses.size(); ++i)
        positive[i] = fitnesses[i] - f_min + 1.0;
    const double p_max = *std::max_element(positive.begin(), positive.end());
    std::vector<double> out(fitnesses.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < positive.size(); ++i) {
        out[i] = p_max + 1.0 - positive[i];
        sum += out[i];
    }
    for (auto& p : out)
        p /= sum;
    return out;
}

/// Index drawn from a probability vector.
inline std::size_t sample_index(std::span<const double> probabilities, Rng& rng)
{
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        acc += probabilities[i];
        if (u < acc)
            return i;
    }
    return probabilities.size() - 1;
}

inline std::uint64_t clamp_weight(std::uint64_t w) noexcept
{
    w &= kGeneMask;
    return w == 0 ? 1 : w;
}

/// Per-weight splice: bits at and above `cut` from a, below `cut` from b.
/// cut = 0 yields a's weight, cut = 40 yields b's.
inline std::uint64_t splice(std::uint64_t a, std::uint64_t b, int cut) noexcept
{
    const std::uint64_t low = cut >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << cut) - 1;
    return clamp_weight((a & ~low) | (b & low));
}

inline Genome crossover_at(const Genome& a, const Genome& b, std::span<const int> cuts)
{
    if (a.size() != b.size() || cuts.size() != a.size())
        throw InputError("crossover: genome lengths differ");
    Genome child;
    child.weights.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        child.weights[i] = splice(a.weights[i], b.weights[i], cuts[i]);
    return child;
}

/// Single-point crossover per weight with a uniform cut in [1, 39].
inline Genome crossover(const Genome& a, const Genome& b, Rng& rng)
{
    if (a.size() != b.size())
        throw InputError("crossover: genome lengths differ");
    std::vector<int> cuts(a.size());
    for (auto& c : cuts)
        c = static_cast<int>(rng.between(1, kGeneBits - 1));
    return crossover_at(a, b, cuts);
}

/// Flips each of the 40 bits of every weight with probability `rate`.
inline Genome mutate(Genome g, double rate, Rng& rng)
{
    if (!(rate >= 0.0 && rate <= 1.0))
        throw ParameterError("mutate: rate must lie in [0, 1]");
    if (rate == 0.0)
        return g;
    for (auto& w : g.weights) {
        std::uint64_t flips = 0;
        for (int bit = 0; bit < kGeneBits; ++bit)
            if (rng.bernoulli(rate))
                flips |= std::uint64_t{1} << bit;
        w = clamp_weight(w ^ flips);
    }
    return g;
}

/// Pulls any weight whose share exceeds w_max down to floor(w_max * total)
/// (minimum 1) and re-normalizes, until no share exceeds the ceiling.
inline Genome repair_ceiling(Genome g, double w_max)
{
    if (!(w_max > 0.0 && w_max < 1.0))
        throw ParameterError("repair_ceiling: w_max must lie in (0, 1)");
    if (w_max * static_cast<double>(g.size()) < 1.0)
        throw CeilingError("repair_ceiling: " + std::to_string(g.size()) + " members cannot all stay below w_max=" +
                              std::to_string(w_max));
    for (;;) {
        const std::uint64_t total = g.total();
        auto it = std::max_element(g.weights.begin(), g.weights.end());
        // integer test of w / total > w_max
        if (static_cast<long double>(*it) <= static_cast<long double>(w_max) * static_cast<long double>(total))
            return g;
        const auto ceiling = static_cast<std::uint64_t>(
            std::floor(static_cast<long double>(w_max) * static_cast<long double>(total)));
        const std::uint64_t next = std::max<std::uint64_t>(1, ceiling);
        if (next >= *it)
            return g;  // cannot shrink further
        *it = next;
    }
}

/// Weighted mean of member scores: sum w_i s_i / sum w_i.
inline double weighted_score(std::span<const double> member_scores, const Genome& g)
{
    if (member_scores.size() != g.size())
        throw InputError("ensemble: member count does not match genome length");
    long double num = 0.0L;
    long double den = 0.0L;
    for (std::size_t i = 0; i < g.size(); ++i) {
        num += static_cast<long double>(g.weights[i]) * member_scores[i];
        den += static_cast<long double>(g.weights[i]);
    }
    return static_cast<double>(num / den);
}

inline Prediction ensemble_predict(std::span<const TrainedModel> members, const Genome& g, const Transaction& record)
{
    if (members.size() != g.size())
        throw InputError("ensemble_predict: member count does not match genome length");
    std::vector<double> scores(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
        scores[i] = predict(members[i], record).score;
    return make_prediction(weighted_score(scores, g));
}

// ---------------------------------------------------------------------------
// Evolution

struct GenerationStats {
    std::size_t generation = 0;
    Money best_fitness;  // best ever seen, so non-increasing
    Money mean_fitness;  // mean of this generation, rounded to a micro-unit
    Genome best_genome;
};

struct EvolutionResult {
    Genome best;
    Money best_fitness;
    std::vector<GenerationStats> trace;
};

/// Cached member outputs on the validation split; fitness evaluation never
/// re-runs the members.
struct ValidationSet {
    std::vector<std::vector<double>> member_scores;  // [record][member]
    std::vector<Label> truth;
    std::vector<double> amounts;
};

inline Money ensemble_fitness(const ValidationSet& v, const Genome& g, const CostModel& cm)
{
    std::vector<Label> predicted(v.truth.size());
    for (std::size_t i = 0; i < v.truth.size(); ++i)
        predicted[i] = make_prediction(weighted_score(v.member_scores[i], g)).label;
    return fraud_cost(predicted, v.truth, v.amounts, cm);
}

/// Runs the GA on cached validation scores. The best genome ever evaluated
/// is kept outside the population, which is fully replaced each generation.
inline EvolutionResult optimize_weights(const ValidationSet& v, const GAConfig& cfg, const CostModel& cm,
                                        std::optional<Population> initial = std::nullopt)
{
    validate(cfg);
    if (v.truth.empty())
        throw InputError("optimize_weights: empty validation set");
    const std::size_t n_members = v.member_scores.front().size();
    Population pop = initial ? std::move(*initial) : init_population(cfg, n_members);
    for (auto& g : pop.genomes) {
        if (g.size() != n_members)
            throw InputError("optimize_weights: genome length does not match member count");
        g = repair_ceiling(std::move(g), cfg.w_max);
    }

    Rng rng(derive_seed(cfg.seed, {0x6761ULL}));
    const auto start = std::chrono::steady_clock::now();
    EvolutionResult result;
    bool have_best = false;

    auto evaluate = [&](std::size_t generation) {
        pop.fitnesses.resize(pop.genomes.size());
        __int128 sum = 0;
        for (std::size_t i = 0; i < pop.genomes.size(); ++i) {
            pop.fitnesses[i] = ensemble_fitness(v, pop.genomes[i], cm);
            sum += pop.fitnesses[i].micros();
            if (!have_best || pop.fitnesses[i] < result.best_fitness) {
                result.best = pop.genomes[i];
                result.best_fitness = pop.fitnesses[i];
                have_best = true;
            }
        }
        const auto n = static_cast<__int128>(pop.genomes.size());
        const auto mean = static_cast<std::int64_t>((sum >= 0 ? sum + n / 2 : sum - n / 2) / n);
        result.trace.push_back({generation, result.best_fitness, Money::from_micros(mean), result.best});
    };

    evaluate(0);
    for (std::size_t gen = 1;; ++gen) {
        if (cfg.generations) {
            if (gen > *cfg.generations)
                break;
        } else if (std::chrono::steady_clock::now() - start >= cfg.time_budget) {
            break;
        }
        std::vector<double> fit(pop.fitnesses.size());
        for (std::size_t i = 0; i < fit.size(); ++i)
            fit[i] = pop.fitnesses[i].units();
        const auto probs = selection_probabilities(fit);

        std::vector<Genome> children;
        children.reserve(cfg.population_size);
        for (std::size_t c = 0; c < cfg.population_size; ++c) {
            const auto& a = pop.genomes[sample_index(probs, rng)];
            const auto& b = pop.genomes[sample_index(probs, rng)];
            children.push_back(repair_ceiling(mutate(crossover(a, b, rng), cfg.mutation_rate, rng), cfg.w_max));
        }
        pop.genomes = std::move(children);
        evaluate(gen);
    }
    return result;
}

/// Trained members plus the evolved weights.
struct Ensemble {
    std::vector<TrainedModel> members;
    Genome weights;
    EvolutionResult evolution;

    Prediction predict(const Transaction& t) const { return ensemble_predict(members, weights, t); }
};

/// Splits `records` at cfg.train_fraction (after a seeded shuffle), trains the
/// members on the first part, caches their validation scores and evolves weights.
inline Ensemble evolve(std::span<const ClassifierSpec> member_specs, std::span<const Transaction> records,
                       const GAConfig& cfg, const CostModel& cm)
{
    validate(cfg);
    if (member_specs.size() < 2)
        throw ParameterError("ensemble needs at least two members");
    Rng rng(derive_seed(cfg.seed, {0x73706c6974ULL}));
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.index(i)]);
    const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(records.size())));

    std::vector<Transaction> train_part, valid_part;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_train ? train_part : valid_part).push_back(records[order[i]]);
    auto has_both = [](const std::vector<Transaction>& part) {
        const auto f = std::count_if(part.begin(), part.end(), [](const Transaction& t) { return is_fraud(t.label); });
        return f > 0 && static_cast<std::size_t>(f) < part.size();
    };
    if (!has_both(train_part) || !has_both(valid_part))
        throw SplitError("ensemble split lost a class (train " + std::to_string(train_part.size()) + ", validation " +
                         std::to_string(valid_part.size()) + ")");

    Ensemble e;
    for (const auto& spec : member_specs)
        e.members.push_back(train(spec, std::span<const Transaction>(train_part)));

    ValidationSet v;
    for (const auto& t : valid_part) {
        std::vector<double> s(e.members.size());
        for (std::size_t m = 0; m < e.members.size(); ++m)
            s[m] = fraudbench::predict(e.members[m], t).score;
        v.member_scores.push_back(std::move(s));
        v.truth.push_back(t.label);
        v.amounts.push_back(t.amount);
    }
    e.evolution = optimize_weights(v, cfg, cm);
    e.weights = e.evolution.best;
    return e;
}

inline Ensemble evolve(std::span<const ClassifierSpec> member_specs, const Sample& sample, const GAConfig& cfg,
                       const CostModel& cm)
{
    return evolve(member_specs, std::span<const Transaction>(sample.records), cfg, cm);
}

}  // namespace fraudbench
