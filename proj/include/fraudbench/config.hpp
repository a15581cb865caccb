#pragma once

// Test configuration and its JSON form. Unknown keys are rejected.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fraudbench/classifiers.hpp"
#include "fraudbench/core.hpp"
#include "fraudbench/ensemble.hpp"
#include "fraudbench/evaluation.hpp"
#include "fraudbench/sampling.hpp"

namespace fraudbench {

struct SyntheticSource {
    std::size_t n = 50'000;
    double fraud_rate = 0.004;
    std::uint64_t seed = 1;
};

/// Either a CSV path or the synthetic generator.
struct DatasetSource {
    std::optional<std::string> path;
    SyntheticSource synthetic;
};

inline Dataset load(const DatasetSource& src)
{
    if (src.path)
        return load_dataset(*src.path);
    return generate_synthetic(src.synthetic.n, src.synthetic.fraud_rate, src.synthetic.seed);
}

struct EnsembleConfig {
    GAConfig ga;
    std::vector<ClassifierSpec> members;
};

/// LOG(l1,0.5), SVC(l1,0.5), RF(80): the three cheapest systems at their tuned settings.
inline std::vector<ClassifierSpec> default_ensemble_members()
{
    return {{ModelKind::LOG, Penalty::l1, 0.5}, {ModelKind::SVC, Penalty::l1, 0.5}, {ModelKind::RF, Penalty::l2, 1.0, 80}};
}

struct TestConfig {
    DatasetSource data;
    double sample_fraction = 0.2;
    std::vector<SampleSpec> samples;
    std::vector<ClassifierSpec> classifiers;
    std::size_t mc_iterations = 1;
    CostModel cost_model;
    std::optional<EnsembleConfig> ensemble;
    std::uint64_t master_seed = 0;
    std::string output_dir = "out";
    std::size_t max_retries = 5;
};

inline void validate(const TestConfig& cfg)
{
    if (cfg.mc_iterations < 1)
        throw ParameterError("mc_iterations must be >= 1");
    if (cfg.samples.empty())
        throw ParameterError("sample grid is empty");
    if (cfg.classifiers.empty() && !cfg.ensemble)
        throw ParameterError("classifier grid is empty");
    for (const auto& c : cfg.classifiers)
        validate(c);
    validate(cfg.cost_model);
    if (cfg.ensemble) {
        validate(cfg.ensemble->ga);
        if (cfg.ensemble->members.size() < 2)
            throw ParameterError("ensemble needs at least two members");
        if (cfg.ensemble->ga.w_max * static_cast<double>(cfg.ensemble->members.size()) < 1.0)
            throw CeilingError("ensemble: " + std::to_string(cfg.ensemble->members.size()) +
                               " members cannot all stay below w_max");
    }
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
        throw ParameterError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParameterError(where + ": unknown key '" + it.key() + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const SampleSpec& s)
{
    nlohmann::json j{{"method", to_string(s.method)}};
    if (s.method != SampleMethod::undersample)
        j["size"] = s.target_size;
    if (s.method != SampleMethod::simple)
        j["ratio"] = s.fraud_ratio;
    if (s.method == SampleMethod::smote)
        j["k_neighbors"] = s.k_neighbors;
    return j;
}

inline SampleSpec sample_spec_from_json(const nlohmann::json& j)
{
    detail::reject_unknown(j, {"method", "size", "ratio", "k_neighbors"}, "sample");
    SampleSpec s;
    s.method = sample_method_from_string(j.at("method").get<std::string>());
    if (j.contains("size"))
        s.target_size = j["size"].get<std::size_t>();
    if (j.contains("ratio"))
        s.fraud_ratio = j["ratio"].get<double>();
    if (j.contains("k_neighbors"))
        s.k_neighbors = j["k_neighbors"].get<std::size_t>();
    return s;
}

inline nlohmann::json to_json(const CostModel& cm)
{
    return {{"c_f", cm.c_f}, {"c_e", cm.c_e}, {"c_l", cm.c_l}, {"f_m", cm.f_m}};
}

inline CostModel cost_model_from_json(const nlohmann::json& j)
{
    detail::reject_unknown(j, {"c_f", "c_e", "c_l", "f_m"}, "cost_model");
    CostModel cm;
    cm.c_f = j.value("c_f", cm.c_f);
    cm.c_e = j.value("c_e", cm.c_e);
    cm.c_l = j.value("c_l", cm.c_l);
    cm.f_m = j.value("f_m", cm.f_m);
    validate(cm);
    return cm;
}

inline nlohmann::json to_json(const EnsembleConfig& e)
{
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : e.members) {
        auto mj = to_json(m);
        mj.erase("seed");
        members.push_back(mj);
    }
    nlohmann::json j{{"members", members},
                     {"population_size", e.ga.population_size},
                     {"mutation_rate", e.ga.mutation_rate},
                     {"w_max", e.ga.w_max},
                     {"train_fraction", e.ga.train_fraction}};
    if (e.ga.generations)
        j["generations"] = *e.ga.generations;
    else
        j["seconds"] = static_cast<double>(e.ga.time_budget.count()) / 1000.0;
    return j;
}

inline EnsembleConfig ensemble_config_from_json(const nlohmann::json& j)
{
    detail::reject_unknown(j, {"members", "population_size", "mutation_rate", "w_max", "train_fraction", "seconds",
                               "generations"},
                           "ensemble");
    EnsembleConfig e;
    if (j.contains("members"))
        for (const auto& m : j["members"])
            e.members.push_back(classifier_spec_from_json(m));
    else
        e.members = default_ensemble_members();
    e.ga.population_size = j.value("population_size", e.ga.population_size);
    e.ga.mutation_rate = j.value("mutation_rate", e.ga.mutation_rate);
    e.ga.w_max = j.value("w_max", e.ga.w_max);
    e.ga.train_fraction = j.value("train_fraction", e.ga.train_fraction);
    if (j.contains("seconds"))
        e.ga.time_budget = std::chrono::milliseconds(std::llround(j["seconds"].get<double>() * 1000.0));
    if (j.contains("generations"))
        e.ga.generations = j["generations"].get<std::size_t>();
    validate(e.ga);
    return e;
}

inline nlohmann::json to_json(const TestConfig& cfg)
{
    nlohmann::json j;
    if (cfg.data.path)
        j["data"] = *cfg.data.path;
    else
        j["synthetic"] = {{"n", cfg.data.synthetic.n},
                          {"fraud_rate", cfg.data.synthetic.fraud_rate},
                          {"seed", cfg.data.synthetic.seed}};
    j["sample_fraction"] = cfg.sample_fraction;
    j["samples"] = nlohmann::json::array();
    for (const auto& s : cfg.samples)
        j["samples"].push_back(to_json(s));
    j["classifiers"] = nlohmann::json::array();
    for (const auto& c : cfg.classifiers) {
        auto cj = to_json(c);
        cj.erase("seed");
        j["classifiers"].push_back(cj);
    }
    j["mc_iterations"] = cfg.mc_iterations;
    j["cost_model"] = to_json(cfg.cost_model);
    if (cfg.ensemble)
        j["ensemble"] = to_json(*cfg.ensemble);
    j["master_seed"] = cfg.master_seed;
    j["output"] = cfg.output_dir;
    j["max_retries"] = cfg.max_retries;
    return j;
}

inline const std::set<std::string>& test_config_keys()
{
    static const std::set<std::string> keys{"data",        "synthetic",  "sample_fraction", "samples",
                                            "classifiers", "mc_iterations", "cost_model",   "ensemble",
                                            "master_seed", "output",     "max_retries",     "search"};
    return keys;
}

/// Unknown keys anywhere in the document are rejected. A "search" block is
/// accepted here and read by search_grid_from_json.
inline TestConfig test_config_from_json(const nlohmann::json& j)
{
    detail::reject_unknown(j, test_config_keys(), "config");
    TestConfig cfg;
    if (j.contains("data") && j.contains("synthetic"))
        throw ParameterError("config: 'data' and 'synthetic' are mutually exclusive");
    if (j.contains("data"))
        cfg.data.path = j["data"].get<std::string>();
    if (j.contains("synthetic")) {
        const auto& s = j["synthetic"];
        detail::reject_unknown(s, {"n", "fraud_rate", "seed"}, "synthetic");
        cfg.data.synthetic.n = s.value("n", cfg.data.synthetic.n);
        cfg.data.synthetic.fraud_rate = s.value("fraud_rate", cfg.data.synthetic.fraud_rate);
        cfg.data.synthetic.seed = s.value("seed", cfg.data.synthetic.seed);
    }
    cfg.sample_fraction = j.value("sample_fraction", cfg.sample_fraction);
    if (j.contains("samples"))
        for (const auto& s : j["samples"])
            cfg.samples.push_back(sample_spec_from_json(s));
    if (j.contains("classifiers"))
        for (const auto& c : j["classifiers"])
            cfg.classifiers.push_back(classifier_spec_from_json(c));
    cfg.mc_iterations = j.value("mc_iterations", cfg.mc_iterations);
    if (j.contains("cost_model"))
        cfg.cost_model = cost_model_from_json(j["cost_model"]);
    if (j.contains("ensemble"))
        cfg.ensemble = ensemble_config_from_json(j["ensemble"]);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.output_dir = j.value("output", cfg.output_dir);
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    return cfg;
}

inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParameterError(path + ": " + e.what());
    }
}

}  // namespace fraudbench
