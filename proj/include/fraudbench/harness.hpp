#pragma once

// Monte Carlo test driver. Each iteration re-partitions the dataset, builds
// every requested sample, trains and scores every classifier (and optionally
// the GA ensemble) and appends one ResultRow per (iteration, sample, model).

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fraudbench/classifiers.hpp"
#include "fraudbench/config.hpp"
#include "fraudbench/core.hpp"
#include "fraudbench/ensemble.hpp"
#include "fraudbench/evaluation.hpp"
#include "fraudbench/sampling.hpp"

namespace fraudbench {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kMasterSchemaVersion = 1;

/// "under(r=0.3)", "smote(n=1000,r=0.5,k=5)", "simple(n=2000)".
inline std::string sample_label(const SampleSpec& s)
{
    std::ostringstream os;
    os << to_string(s.method) << '(';
    switch (s.method) {
    case SampleMethod::undersample: os << "r=" << detail::format_exact(s.fraud_ratio); break;
    case SampleMethod::smote:
        os << "n=" << s.target_size << ",r=" << detail::format_exact(s.fraud_ratio) << ",k=" << s.k_neighbors;
        break;
    case SampleMethod::simple: os << "n=" << s.target_size; break;
    }
    os << ')';
    return os.str();
}

enum class Role { model, control, member, ensemble };

inline std::string to_string(Role r)
{
    switch (r) {
    case Role::model: return "model";
    case Role::control: return "control";
    case Role::member: return "member";
    case Role::ensemble: return "ensemble";
    }
    return "?";
}

inline Role role_from_string(const std::string& s)
{
    if (s == "model") return Role::model;
    if (s == "control") return Role::control;
    if (s == "member") return Role::member;
    if (s == "ensemble") return Role::ensemble;
    throw ParameterError("unknown role: " + s);
}

/// KNN and GNB are reported as controls; they are never excluded here.
inline Role role_for(ModelKind k)
{
    return (k == ModelKind::KNN || k == ModelKind::GNB) ? Role::control : Role::model;
}

struct ResultRow {
    std::size_t iteration = 0;
    std::size_t attempt = 0;
    SampleSpec sample;         // design; seed is the derived one
    std::size_t sample_size = 0;
    double achieved_ratio = 0.0;
    std::string model;         // ClassifierSpec::label() or ENSEMBLE[...]
    std::string kind;          // LOG..KNN or ENSEMBLE
    Role role = Role::model;
    ClassifierSpec classifier; // meaningless for ensemble rows
    ConfusionCounts counts;
    MetricSet metrics;
    Money cost;
    std::string weights;       // ensemble genome "w1;w2;...", empty otherwise
    double wall_ms = 0.0;      // kept out of results.csv
};

inline std::string combination_key(const ResultRow& r)
{
    return sample_label(r.sample) + " | " + r.model + " | " + to_string(r.role);
}

// ---------------------------------------------------------------------------
// Aggregation

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;    // sample standard deviation, 0 for a single run
    std::size_t defined = 0;  // runs where the metric was defined
};

inline const std::vector<std::string>& metric_names()
{
    static const std::vector<std::string> names{"tpr", "fpr", "tnr", "fnr", "ppv", "npv",
                                                "fdr", "for", "precision", "recall", "accuracy", "f1"};
    return names;
}

inline std::vector<Ratio> metric_values(const MetricSet& m)
{
    return {m.tpr, m.fpr, m.tnr, m.fnr, m.ppv, m.npv, m.fdr, m.for_, m.precision, m.recall, m.accuracy, m.f1};
}

inline MetricSummary summarize(const std::vector<double>& xs)
{
    MetricSummary s;
    s.defined = xs.size();
    if (xs.empty())
        return s;
    long double sum = 0.0L;
    for (double x : xs)
        sum += x;
    const long double mean = sum / static_cast<long double>(xs.size());
    s.mean = static_cast<double>(mean);
    if (xs.size() > 1) {
        long double ss = 0.0L;
        for (double x : xs)
            ss += (x - mean) * (x - mean);
        s.stddev = static_cast<double>(std::sqrt(ss / static_cast<long double>(xs.size() - 1)));
    }
    return s;
}

struct CombinationSummary {
    std::string key;
    std::string sample;
    std::string model;
    std::string kind;
    Role role = Role::model;
    std::size_t runs = 0;
    std::vector<MetricSummary> metrics;  // in metric_names() order
    MetricSummary cost;                  // currency units
};

struct MasterLog {
    nlohmann::json config;  // echo of the TestConfig, null when rebuilt from CSV
    std::vector<CombinationSummary> combinations;
    std::optional<std::size_t> best_cost;  // index into combinations
    std::optional<std::size_t> best_f1;
    std::vector<nlohmann::json> ensemble_genomes;
    nlohmann::json environment;
};

inline nlohmann::json environment_metadata()
{
    return {{"library_version", kLibraryVersion},
            {"compiler", __VERSION__},
            {"cxx_standard", static_cast<long>(__cplusplus)},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)}};
}

/// Means and standard deviations per combination, in order of first appearance.
inline std::vector<CombinationSummary> aggregate(const std::vector<ResultRow>& rows)
{
    std::vector<CombinationSummary> out;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<std::vector<double>>> metric_samples;
    std::vector<std::vector<std::int64_t>> costs;
    for (const auto& r : rows) {
        const auto key = combination_key(r);
        auto [it, inserted] = index.emplace(key, out.size());
        if (inserted) {
            out.push_back({key, sample_label(r.sample), r.model, r.kind, r.role, 0, {}, {}});
            metric_samples.emplace_back(metric_names().size());
            costs.emplace_back();
        }
        const std::size_t c = it->second;
        ++out[c].runs;
        const auto vals = metric_values(r.metrics);
        for (std::size_t m = 0; m < vals.size(); ++m)
            if (vals[m])
                metric_samples[c][m].push_back(*vals[m]);
        costs[c].push_back(r.cost.micros());
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
        for (const auto& xs : metric_samples[c])
            out[c].metrics.push_back(summarize(xs));
        // exact micro-unit sum, then one division
        __int128 sum = 0;
        for (auto m : costs[c])
            sum += m;
        const long double n = static_cast<long double>(costs[c].size());
        const long double mean = static_cast<long double>(sum) / n / Money::kMicrosPerUnit;
        out[c].cost.mean = static_cast<double>(mean);
        out[c].cost.defined = costs[c].size();
        if (costs[c].size() > 1) {
            long double ss = 0.0L;
            for (auto m : costs[c]) {
                const long double d = static_cast<long double>(m) / Money::kMicrosPerUnit - mean;
                ss += d * d;
            }
            out[c].cost.stddev = static_cast<double>(std::sqrt(ss / (n - 1)));
        }
    }
    return out;
}

inline MasterLog build_master_log(const std::vector<ResultRow>& rows, nlohmann::json config)
{
    MasterLog log;
    log.config = std::move(config);
    log.combinations = aggregate(rows);
    for (std::size_t i = 0; i < log.combinations.size(); ++i) {
        const auto& c = log.combinations[i];
        if (!log.best_cost || c.cost.mean < log.combinations[*log.best_cost].cost.mean)
            log.best_cost = i;
        const auto& f1 = c.metrics.back();
        if (f1.defined > 0 && (!log.best_f1 || f1.mean > log.combinations[*log.best_f1].metrics.back().mean))
            log.best_f1 = i;
    }
    for (const auto& r : rows)
        if (r.role == Role::ensemble)
            log.ensemble_genomes.push_back({{"iteration", r.iteration}, {"sample", sample_label(r.sample)},
                                            {"weights", r.weights}});
    log.environment = environment_metadata();
    return log;
}

// ---------------------------------------------------------------------------
// Driver

struct TraceRow {
    std::size_t iteration = 0;
    std::string sample;
    GenerationStats stats;
};

struct IterationFailure {
    std::size_t iteration = 0;
    std::size_t attempt = 0;
    std::string message;
};

struct RunResult {
    std::vector<ResultRow> rows;
    MasterLog master;
    std::vector<TraceRow> ga_trace;
    std::vector<IterationFailure> failures;  // retried degenerate attempts
};

using LogSink = std::function<void(const std::string&)>;

namespace detail {

struct EvalSet {
    std::vector<Transaction> records;
    std::vector<Label> truth;
    std::vector<double> amounts;
};

inline EvalSet make_eval_set(const Dataset& test_pool, const std::vector<Transaction>& leftover)
{
    EvalSet e;
    e.records.reserve(test_pool.size() + leftover.size());
    e.records.insert(e.records.end(), test_pool.begin(), test_pool.end());
    e.records.insert(e.records.end(), leftover.begin(), leftover.end());
    e.truth = labels_of(e.records);
    e.amounts.resize(e.records.size());
    for (std::size_t i = 0; i < e.records.size(); ++i)
        e.amounts[i] = e.records[i].amount;
    return e;
}

inline void score_row(ResultRow& row, const std::vector<Label>& predicted, const EvalSet& eval, const CostModel& cm)
{
    row.counts = confusion(predicted, eval.truth);
    row.metrics = derive_metrics(row.counts);
    row.cost = fraud_cost(predicted, eval.truth, eval.amounts, cm);
}

inline std::vector<Label> predicted_labels(const TrainedModel& m, const FeatureMatrix& x)
{
    std::vector<Label> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out[static_cast<std::size_t>(i)] =
            predict(m, std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols()))).label;
    return out;
}

inline std::string genome_text(const Genome& g)
{
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i)
        s += (i ? ";" : "") + std::to_string(g.weights[i]);
    return s;
}

inline std::string ensemble_label(const std::vector<ClassifierSpec>& members)
{
    std::string s = "ENSEMBLE[";
    for (std::size_t i = 0; i < members.size(); ++i)
        s += (i ? "+" : "") + members[i].label();
    return s + "]";
}

struct IterationOutput {
    std::vector<ResultRow> rows;
    std::vector<TraceRow> trace;
};

inline double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

/// One Monte Carlo iteration under one derived seed. Throws DegenerateError
/// subclasses for retryable failures.
inline IterationOutput run_iteration(const TestConfig& cfg, const Dataset& data, std::size_t iteration,
                                     std::size_t attempt)
{
    const std::uint64_t seed = derive_seed(cfg.master_seed, {iteration, attempt});
    const Partition part = partition(data, cfg.sample_fraction, derive_seed(seed, {1}));

    IterationOutput out;
    for (std::size_t s = 0; s < cfg.samples.size(); ++s) {
        SampleSpec spec = cfg.samples[s];
        spec.seed = derive_seed(seed, {2, s});
        const Sample sample = build_sample(part.sample_pool, spec);
        const EvalSet eval = make_eval_set(part.test_pool, sample.leftover);
        const FeatureMatrix eval_x = feature_matrix(eval.records);

        auto base_row = [&](std::string model, std::string kind, Role role) {
            ResultRow r;
            r.iteration = iteration;
            r.attempt = attempt;
            r.sample = spec;
            r.sample_size = sample.size();
            r.achieved_ratio = sample.achieved_ratio;
            r.model = std::move(model);
            r.kind = std::move(kind);
            r.role = role;
            return r;
        };

        for (std::size_t j = 0; j < cfg.classifiers.size(); ++j) {
            const auto t0 = std::chrono::steady_clock::now();
            ClassifierSpec cs = cfg.classifiers[j];
            cs.seed = derive_seed(seed, {3, s, j});
            const TrainedModel model = train(cs, sample);
            ResultRow row = base_row(cs.label(), to_string(cs.kind), role_for(cs.kind));
            row.classifier = cs;
            score_row(row, predicted_labels(model, eval_x), eval, cfg.cost_model);
            row.wall_ms = elapsed_ms(t0);
            out.rows.push_back(std::move(row));
        }

        if (cfg.ensemble) {
            const auto t0 = std::chrono::steady_clock::now();
            GAConfig ga = cfg.ensemble->ga;
            ga.seed = derive_seed(seed, {4, s});
            std::vector<ClassifierSpec> members = cfg.ensemble->members;
            for (std::size_t m = 0; m < members.size(); ++m)
                members[m].seed = derive_seed(seed, {5, s, m});
            const Ensemble ens = evolve(members, sample, ga, cfg.cost_model);

            // member scores on the evaluation set, reused for the ensemble vote
            std::vector<std::vector<double>> scores(ens.members.size());
            for (std::size_t m = 0; m < ens.members.size(); ++m) {
                const auto t1 = std::chrono::steady_clock::now();
                scores[m].resize(eval.records.size());
                std::vector<Label> labels(eval.records.size());
                for (Eigen::Index i = 0; i < eval_x.rows(); ++i) {
                    const auto p = predict(ens.members[m], std::span<const double>(eval_x.row(i).data(),
                                                                                   kModelFeatureCount));
                    scores[m][static_cast<std::size_t>(i)] = p.score;
                    labels[static_cast<std::size_t>(i)] = p.label;
                }
                ResultRow row = base_row(members[m].label(), to_string(members[m].kind), Role::member);
                row.classifier = members[m];
                score_row(row, labels, eval, cfg.cost_model);
                row.wall_ms = elapsed_ms(t1);
                out.rows.push_back(std::move(row));
            }
            std::vector<Label> labels(eval.records.size());
            std::vector<double> member_scores(ens.members.size());
            for (std::size_t i = 0; i < labels.size(); ++i) {
                for (std::size_t m = 0; m < ens.members.size(); ++m)
                    member_scores[m] = scores[m][i];
                labels[i] = make_prediction(weighted_score(member_scores, ens.weights)).label;
            }
            ResultRow row = base_row(ensemble_label(cfg.ensemble->members), "ENSEMBLE", Role::ensemble);
            row.weights = genome_text(ens.weights);
            score_row(row, labels, eval, cfg.cost_model);
            row.wall_ms = elapsed_ms(t0);
            out.rows.push_back(std::move(row));
            for (const auto& g : ens.evolution.trace)
                out.trace.push_back({iteration, sample_label(spec), g});
        }
    }
    return out;
}

}  // namespace detail

/// Runs cfg.mc_iterations iterations on `data`. A degenerate failure discards
/// the iteration's partial rows and retries it under the next derived seed,
/// at most cfg.max_retries times.
inline RunResult run_test(const TestConfig& cfg, const Dataset& data, const LogSink& log = {})
{
    validate(cfg);
    RunResult result;
    for (std::size_t it = 0; it < cfg.mc_iterations; ++it) {
        for (std::size_t attempt = 0;; ++attempt) {
            try {
                auto out = detail::run_iteration(cfg, data, it, attempt);
                for (auto& r : out.rows)
                    result.rows.push_back(std::move(r));
                for (auto& t : out.trace)
                    result.ga_trace.push_back(std::move(t));
                break;
            } catch (const DegenerateError& e) {
                result.failures.push_back({it, attempt, e.what()});
                if (log)
                    log("iteration " + std::to_string(it) + " attempt " + std::to_string(attempt) + ": " + e.what());
                if (attempt >= cfg.max_retries) {
                    std::string summary = "iteration " + std::to_string(it) + " failed after " +
                                          std::to_string(attempt + 1) + " attempts:";
                    for (const auto& f : result.failures)
                        if (f.iteration == it)
                            summary += "\n  attempt " + std::to_string(f.attempt) + ": " + f.message;
                    throw Error(summary);
                }
            }
        }
        if (log)
            log("iteration " + std::to_string(it + 1) + "/" + std::to_string(cfg.mc_iterations) + " done");
    }
    result.master = build_master_log(result.rows, to_json(cfg));
    return result;
}

inline RunResult run_test(const TestConfig& cfg, const LogSink& log = {})
{
    return run_test(cfg, load(cfg.data), log);
}

}  // namespace fraudbench
