// fraudbench: run Monte Carlo tests, bootstrap searches and report rendering.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fraudbench/fraudbench.hpp"

namespace fb = fraudbench;

namespace {

struct RunOptions {
    std::string config;
    std::string data;
    std::string synthetic;
    std::uint64_t synthetic_seed = 1;
    std::string method;
    std::optional<std::size_t> size;
    std::optional<double> ratio;
    std::optional<std::size_t> k_neighbors;
    std::vector<std::string> models;
    std::string penalty = "l2";
    double c = 1.0;
    std::size_t trees = 10;
    std::size_t k = 5;
    std::optional<std::size_t> iters;
    std::optional<std::uint64_t> seed;
    bool ensemble = false;
    std::optional<double> ga_seconds;
    std::optional<std::size_t> ga_generations;
    std::string out;
    bool quiet = false;
};

fb::LogSink stderr_log(bool quiet)
{
    if (quiet)
        return {};
    return [](const std::string& m) { std::cerr << m << '\n'; };
}

fb::SyntheticSource parse_synthetic(const std::string& text, std::uint64_t seed)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw fb::ParameterError("--synthetic expects N,RATE");
    fb::SyntheticSource s;
    try {
        s.n = std::stoul(text.substr(0, comma));
        s.fraud_rate = std::stod(text.substr(comma + 1));
    } catch (const std::exception&) {
        throw fb::ParameterError("--synthetic expects N,RATE, got '" + text + "'");
    }
    s.seed = seed;
    return s;
}

fb::TestConfig build_config(const RunOptions& o, const CLI::App& cmd)
{
    fb::TestConfig cfg;
    if (!o.config.empty())
        cfg = fb::test_config_from_json(fb::read_json_file(o.config));

    if (!o.data.empty()) {
        cfg.data.path = o.data;
    } else if (!o.synthetic.empty()) {
        cfg.data.path.reset();
        cfg.data.synthetic = parse_synthetic(o.synthetic, o.synthetic_seed);
    }

    if (!o.method.empty() || o.size || o.ratio || o.k_neighbors || cfg.samples.empty()) {
        fb::SampleSpec s;
        if (!o.method.empty())
            s.method = fb::sample_method_from_string(o.method);
        s.target_size = o.size.value_or(s.method == fb::SampleMethod::undersample ? 0 : 1000);
        s.fraud_ratio = o.ratio.value_or(s.fraud_ratio);
        s.k_neighbors = o.k_neighbors.value_or(s.k_neighbors);
        cfg.samples = {s};
    }

    const bool model_flags = !o.models.empty() || cmd.count("--penalty") || cmd.count("--c") ||
                             cmd.count("--trees") || cmd.count("--k");
    if (model_flags || cfg.classifiers.empty()) {
        std::vector<std::string> kinds = o.models;
        if (kinds.empty())
            kinds = {"LOG", "SVC", "RF", "KNN", "GNB"};
        cfg.classifiers.clear();
        for (const auto& k : kinds) {
            fb::ClassifierSpec spec;
            spec.kind = fb::model_kind_from_string(k);
            spec.penalty = fb::penalty_from_string(o.penalty);
            spec.c_value = o.c;
            spec.trees = o.trees;
            spec.k = o.k;
            fb::validate(spec);
            cfg.classifiers.push_back(spec);
        }
    }

    if (o.iters)
        cfg.mc_iterations = *o.iters;
    if (o.seed)
        cfg.master_seed = *o.seed;
    if (o.ensemble && !cfg.ensemble)
        cfg.ensemble = fb::EnsembleConfig{fb::GAConfig{}, fb::default_ensemble_members()};
    if (cfg.ensemble) {
        if (o.ga_seconds) {
            cfg.ensemble->ga.time_budget = std::chrono::milliseconds(std::llround(*o.ga_seconds * 1000.0));
            cfg.ensemble->ga.generations.reset();
        }
        if (o.ga_generations)
            cfg.ensemble->ga.generations = *o.ga_generations;
    }
    if (!o.out.empty())
        cfg.output_dir = o.out;
    fb::validate(cfg);
    return cfg;
}

int cmd_run(const RunOptions& o, const CLI::App& cmd)
{
    const fb::TestConfig cfg = build_config(o, cmd);
    const auto log = stderr_log(o.quiet);
    const fb::Dataset data = fb::load(cfg.data);
    if (log)
        log("dataset: " + std::to_string(data.size()) + " records, " + std::to_string(data.fraud_count()) +
            " fraud");
    const fb::RunResult result = fb::run_test(cfg, data, log);
    fb::emit_report(result, cfg.output_dir);
    std::ifstream summary(std::filesystem::path(cfg.output_dir) / "summary.md");
    std::cout << summary.rdbuf();
    return 0;
}

int cmd_search(const std::string& config_path, const std::string& out_dir, bool quiet)
{
    const auto doc = fb::read_json_file(config_path);
    nlohmann::json base = doc;
    base.erase("search");
    fb::TestConfig cfg = fb::test_config_from_json(base);
    const fb::SearchGrid grid = fb::search_grid_from_json(doc.value("search", nlohmann::json::object()));
    if (cfg.samples.empty())
        cfg.samples = {grid.samples.front()};
    if (cfg.classifiers.empty())
        cfg.classifiers = {grid.params.front()};
    cfg.ensemble.reset();
    if (!out_dir.empty())
        cfg.output_dir = out_dir;

    const auto log = stderr_log(quiet);
    const fb::Dataset data = fb::load(cfg.data);
    const auto result = fb::bootstrap_search(grid, fb::monte_carlo_evaluator(cfg, data, log));

    nlohmann::json j{{"converged", result.converged},
                     {"rounds", result.rounds.size()},
                     {"sample", fb::to_json(result.sample)},
                     {"params", nlohmann::json::array()},
                     {"dropped", nlohmann::json::array()},
                     {"history", nlohmann::json::array()}};
    for (const auto& p : result.params) {
        auto pj = fb::to_json(p);
        pj.erase("seed");
        j["params"].push_back(pj);
    }
    for (auto k : result.dropped)
        j["dropped"].push_back(fb::to_string(k));
    for (const auto& r : result.rounds) {
        nlohmann::json rj{{"sample_scores", r.sample_scores},
                          {"chosen_sample", fb::sample_label(grid.samples[r.sample_index])},
                          {"params", nlohmann::json::array()}};
        for (const auto& p : r.params)
            rj["params"].push_back(p.label());
        j["history"].push_back(rj);
    }
    std::filesystem::create_directories(cfg.output_dir);
    const auto path = std::filesystem::path(cfg.output_dir) / "search.json";
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw fb::IoError("cannot write " + path.string());
    f << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_report(const std::string& csv, std::string out_dir)
{
    const auto rows = fb::read_results_csv(csv);
    if (out_dir.empty())
        out_dir = std::filesystem::path(csv).parent_path().string();
    if (out_dir.empty())
        out_dir = ".";
    const auto dir = std::filesystem::path(out_dir);
    nlohmann::json config = nullptr;
    if (std::filesystem::exists(dir / "master.json"))
        config = fb::read_json_file((dir / "master.json").string()).value("config", nlohmann::json());
    const fb::MasterLog log = fb::build_master_log(rows, config);
    std::filesystem::create_directories(out_dir);
    std::ofstream master(dir / "master.json", std::ios::binary);
    std::ofstream summary(dir / "summary.md", std::ios::binary);
    if (!master || !summary)
        throw fb::IoError("cannot write into " + out_dir);
    master << fb::to_json(log).dump(2) << '\n';
    fb::write_summary_md(summary, log);
    fb::write_summary_md(std::cout, log);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo benchmark of cost-sensitive fraud detection systems"};
    app.require_subcommand(1);

    RunOptions run;
    auto* r = app.add_subcommand("run", "run a Monte Carlo test and write results");
    r->add_option("--config", run.config, "JSON test configuration; flags below override it")->check(CLI::ExistingFile);
    auto* data_opt = r->add_option("--data", run.data, "transactions CSV (Time,V1..V28,Amount,Class)");
    auto* syn_opt = r->add_option("--synthetic", run.synthetic, "generate N records at fraud RATE, as N,RATE");
    data_opt->excludes(syn_opt);
    r->add_option("--synthetic-seed", run.synthetic_seed, "seed for the synthetic generator");
    r->add_option("--method", run.method, "sampling method")->check(CLI::IsMember({"simple", "under", "smote"}));
    r->add_option("--size", run.size, "target sample size (simple, smote)");
    r->add_option("--ratio", run.ratio, "target fraud ratio (under, smote)");
    r->add_option("--k-neighbors", run.k_neighbors, "SMOTE neighbour count");
    r->add_option("--model", run.models, "classifier kind, repeatable")
        ->check(CLI::IsMember({"LOG", "SVC", "RF", "GNB", "KNN"}));
    r->add_option("--penalty", run.penalty, "LOG/SVC regularizer")->check(CLI::IsMember({"l1", "l2"}));
    r->add_option("--c", run.c, "LOG/SVC inverse regularization strength");
    r->add_option("--trees", run.trees, "RF tree count");
    r->add_option("--k", run.k, "KNN neighbour count");
    r->add_option("--iters", run.iters, "Monte Carlo iterations");
    r->add_option("--seed", run.seed, "master seed");
    r->add_flag("--ensemble", run.ensemble, "also evolve the weighted LOG/SVC/RF ensemble");
    auto* secs = r->add_option("--ga-seconds", run.ga_seconds, "GA wall-clock budget per ensemble");
    auto* gens = r->add_option("--ga-generations", run.ga_generations, "fixed GA generation count (reproducible)");
    secs->excludes(gens);
    r->add_option("--out", run.out, "output directory");
    r->add_flag("-q,--quiet", run.quiet, "no progress on stderr");

    std::string search_config, search_out;
    bool search_quiet = false;
    auto* s = app.add_subcommand("search", "bootstrap search over sample designs and parameters");
    s->add_option("config", search_config, "JSON configuration with an optional \"search\" block")
        ->required()
        ->check(CLI::ExistingFile);
    s->add_option("--out", search_out, "output directory");
    s->add_flag("-q,--quiet", search_quiet, "no progress on stderr");

    std::string report_csv, report_out;
    auto* p = app.add_subcommand("report", "rebuild master.json and summary.md from results.csv");
    p->add_option("results", report_csv, "results.csv")->required()->check(CLI::ExistingFile);
    p->add_option("--out", report_out, "output directory (default: next to results.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*r)
            return cmd_run(run, *r);
        if (*s)
            return cmd_search(search_config, search_out, search_quiet);
        if (*p)
            return cmd_report(report_csv, report_out);
    } catch (const fb::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
