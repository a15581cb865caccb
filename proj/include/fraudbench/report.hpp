#pragma once

// Run artifacts and the search configuration block.
//
// results.csv   one ResultRow per line, columns in results_columns() order;
//               undefined ratios are written as NA, money with six decimals.
// master.json   schema_version, config echo, per-combination summaries,
//               best-combination pointers, ensemble genomes, environment.
// summary.md    mean and standard deviation of cost and F1 per sample design.
// ga_trace.csv  per-generation GA statistics (only when an ensemble ran).
// timings.csv   wall time per row; kept apart so the files above are
//               reproducible byte for byte.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fraudbench/harness.hpp"
#include "fraudbench/search.hpp"

namespace fraudbench {

// ---------------------------------------------------------------------------
// Search configuration

/// "search": {"samples": "tuning" | [...], "params": "tuning" | [...],
/// "defaults": "library" | [...], "round_cap": n, "drop_factor": x}.
inline SearchGrid search_grid_from_json(const nlohmann::json& j)
{
    detail::reject_unknown(j, {"samples", "params", "defaults", "round_cap", "drop_factor"}, "search");
    SearchGrid g;
    const auto named = [](const nlohmann::json& v, const char* name) { return v.is_string() && v == name; };
    if (!j.contains("samples") || named(j["samples"], "tuning"))
        g.samples = tuning_sample_grid();
    else
        for (const auto& s : j["samples"])
            g.samples.push_back(sample_spec_from_json(s));
    if (!j.contains("params") || named(j["params"], "tuning"))
        g.params = tuning_param_grid();
    else
        for (const auto& c : j["params"])
            g.params.push_back(classifier_spec_from_json(c));
    if (!j.contains("defaults") || named(j["defaults"], "library"))
        g.defaults = library_defaults();
    else
        for (const auto& c : j["defaults"])
            g.defaults.push_back(classifier_spec_from_json(c));
    g.round_cap = j.value("round_cap", g.round_cap);
    g.drop_factor = j.value("drop_factor", g.drop_factor);
    validate(g);
    return g;
}

// ---------------------------------------------------------------------------
// CSV cells

namespace detail {

inline std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

/// Splits one CSV line, honouring double-quoted cells with "" escapes.
inline std::vector<std::string> split_quoted(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

inline std::string ratio_text(const Ratio& r) { return r ? format_exact(*r) : "NA"; }

/// Exact decimal rendering of a micro-unit amount, e.g. -12.500000.
inline std::string money_text(Money m)
{
    const std::int64_t v = m.micros();
    const std::uint64_t a = v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
    std::ostringstream os;
    os << (v < 0 ? "-" : "") << a / 1'000'000 << '.' << std::setw(6) << std::setfill('0') << a % 1'000'000;
    return os.str();
}

inline Money parse_money(const std::string& s)
{
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+'))
        neg = s[i++] == '-';
    std::int64_t whole = 0, frac = 0;
    std::size_t digits = 0;
    bool any = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i, any = true)
        whole = whole * 10 + (s[i] - '0');
    if (i < s.size() && s[i] == '.')
        for (++i; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i, any = true)
            if (digits < 6) {
                frac = frac * 10 + (s[i] - '0');
                ++digits;
            }
    if (!any || i != s.size())
        throw ParseError(0, "bad money value '" + s + "'");
    for (; digits < 6; ++digits)
        frac *= 10;
    const std::int64_t micros = whole * Money::kMicrosPerUnit + frac;
    return Money::from_micros(neg ? -micros : micros);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// results.csv

inline const std::vector<std::string>& results_columns()
{
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c{"iteration", "attempt",  "method", "target_size", "fraud_ratio", "k_neighbors",
                                   "sample_seed", "sample_size", "achieved_ratio", "model", "kind", "role",
                                   "penalty", "c", "trees", "k", "model_seed", "tp", "fp", "tn", "fn"};
        for (const auto& m : metric_names())
            c.push_back(m);
        c.emplace_back("cost");
        c.emplace_back("weights");
        return c;
    }();
    return cols;
}

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows)
{
    const auto& cols = results_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : rows) {
        const bool ens = r.role == Role::ensemble;
        const bool pen = !ens && r.classifier.uses_penalty();
        out << r.iteration << ',' << r.attempt << ',' << to_string(r.sample.method) << ',' << r.sample.target_size
            << ',' << detail::format_exact(r.sample.fraud_ratio) << ',' << r.sample.k_neighbors << ','
            << r.sample.seed << ',' << r.sample_size << ',' << detail::format_exact(r.achieved_ratio) << ','
            << detail::csv_cell(r.model) << ',' << r.kind << ',' << to_string(r.role) << ','
            << (pen ? to_string(r.classifier.penalty) : "") << ','
            << (pen ? detail::format_exact(r.classifier.c_value) : "") << ','
            << (!ens && r.classifier.kind == ModelKind::RF ? std::to_string(r.classifier.trees) : "") << ','
            << (!ens && r.classifier.kind == ModelKind::KNN ? std::to_string(r.classifier.k) : "") << ','
            << (ens ? "" : std::to_string(r.classifier.seed)) << ',' << r.counts.tp << ',' << r.counts.fp << ','
            << r.counts.tn << ',' << r.counts.fn;
        for (const auto& v : metric_values(r.metrics))
            out << ',' << detail::ratio_text(v);
        out << ',' << detail::money_text(r.cost) << ',' << r.weights << '\n';
    }
}

namespace detail {

inline std::uint64_t parse_uint(const std::string& s, std::size_t row, const char* what)
{
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(row, std::string("bad ") + what + " '" + s + "'");
    return v;
}

inline double parse_real(const std::string& s, std::size_t row, const char* what)
{
    double v = 0.0;
    if (!parse_double(s, v))
        throw ParseError(row, std::string("bad ") + what + " '" + s + "'");
    return v;
}

}  // namespace detail

/// Reads results.csv back. Metrics are re-derived from the confusion counts
/// and must match the stored values exactly.
inline std::vector<ResultRow> read_results_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(0, "results file is empty");
    const auto header = detail::split_quoted(line);
    if (header != results_columns())
        throw SchemaError("header", "results.csv header does not match the expected columns");

    std::vector<ResultRow> rows;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        ++n;
        const auto c = detail::split_quoted(line);
        if (c.size() != header.size())
            throw ParseError(n, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(c.size()));
        ResultRow r;
        std::size_t i = 0;
        r.iteration = detail::parse_uint(c[i++], n, "iteration");
        r.attempt = detail::parse_uint(c[i++], n, "attempt");
        r.sample.method = sample_method_from_string(c[i++]);
        r.sample.target_size = detail::parse_uint(c[i++], n, "target_size");
        r.sample.fraud_ratio = detail::parse_real(c[i++], n, "fraud_ratio");
        r.sample.k_neighbors = detail::parse_uint(c[i++], n, "k_neighbors");
        r.sample.seed = detail::parse_uint(c[i++], n, "sample_seed");
        r.sample_size = detail::parse_uint(c[i++], n, "sample_size");
        r.achieved_ratio = detail::parse_real(c[i++], n, "achieved_ratio");
        r.model = c[i++];
        r.kind = c[i++];
        r.role = role_from_string(c[i++]);
        if (r.role != Role::ensemble) {
            r.classifier.kind = model_kind_from_string(r.kind);
            if (!c[i].empty())
                r.classifier.penalty = penalty_from_string(c[i]);
            if (!c[i + 1].empty())
                r.classifier.c_value = detail::parse_real(c[i + 1], n, "c");
            if (!c[i + 2].empty())
                r.classifier.trees = detail::parse_uint(c[i + 2], n, "trees");
            if (!c[i + 3].empty())
                r.classifier.k = detail::parse_uint(c[i + 3], n, "k");
            if (!c[i + 4].empty())
                r.classifier.seed = detail::parse_uint(c[i + 4], n, "model_seed");
        }
        i += 5;
        r.counts.tp = detail::parse_uint(c[i++], n, "tp");
        r.counts.fp = detail::parse_uint(c[i++], n, "fp");
        r.counts.tn = detail::parse_uint(c[i++], n, "tn");
        r.counts.fn = detail::parse_uint(c[i++], n, "fn");
        r.metrics = derive_metrics(r.counts);
        for (const auto& v : metric_values(r.metrics))
            if (detail::ratio_text(v) != c[i++])
                throw ParseError(n, "metric '" + header[i - 1] + "' disagrees with the confusion counts");
        try {
            r.cost = detail::parse_money(c[i++]);
        } catch (const ParseError&) {
            throw ParseError(n, "bad cost '" + c[i - 1] + "'");
        }
        r.weights = c[i++];
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<ResultRow> read_results_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    return read_results_csv(in);
}

// ---------------------------------------------------------------------------
// master.json

inline nlohmann::json to_json(const MetricSummary& s)
{
    return {{"mean", s.mean}, {"std", s.stddev}, {"defined", s.defined}};
}

inline nlohmann::json to_json(const MasterLog& log)
{
    nlohmann::json combos = nlohmann::json::array();
    for (const auto& c : log.combinations) {
        nlohmann::json metrics = nlohmann::json::object();
        for (std::size_t m = 0; m < metric_names().size(); ++m)
            metrics[metric_names()[m]] = to_json(c.metrics[m]);
        combos.push_back({{"sample", c.sample},
                          {"model", c.model},
                          {"kind", c.kind},
                          {"role", to_string(c.role)},
                          {"runs", c.runs},
                          {"cost", to_json(c.cost)},
                          {"metrics", metrics}});
    }
    const auto pointer = [&](const std::optional<std::size_t>& i) -> nlohmann::json {
        if (!i)
            return nullptr;
        return {{"index", *i}, {"sample", log.combinations[*i].sample}, {"model", log.combinations[*i].model}};
    };
    return {{"schema_version", kMasterSchemaVersion},
            {"config", log.config},
            {"combinations", combos},
            {"best_cost", pointer(log.best_cost)},
            {"best_f1", pointer(log.best_f1)},
            {"ensemble_genomes", log.ensemble_genomes},
            {"environment", log.environment}};
}

// ---------------------------------------------------------------------------
// summary.md

namespace detail {

inline std::string fixed2(double v)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

}  // namespace detail

/// One table per sample design: cost and F1 (percent) as mean and standard
/// deviation, two decimals.
inline void write_summary_md(std::ostream& out, const MasterLog& log)
{
    out << "# Run summary\n";
    std::vector<std::string> samples;
    for (const auto& c : log.combinations)
        if (std::find(samples.begin(), samples.end(), c.sample) == samples.end())
            samples.push_back(c.sample);
    for (const auto& s : samples) {
        out << "\n## " << s << "\n\n";
        out << "| Model | Role | Runs | Cost mean | Cost std | F1 mean (%) | F1 std (%) |\n";
        out << "|---|---|---|---|---|---|---|\n";
        for (const auto& c : log.combinations) {
            if (c.sample != s)
                continue;
            const auto& f1 = c.metrics.back();
            out << "| " << c.model << " | " << to_string(c.role) << " | " << c.runs << " | "
                << detail::fixed2(c.cost.mean) << " | " << detail::fixed2(c.cost.stddev) << " | "
                << (f1.defined ? detail::fixed2(100.0 * f1.mean) : "NA") << " | "
                << (f1.defined ? detail::fixed2(100.0 * f1.stddev) : "NA") << " |\n";
        }
    }
    if (log.best_cost)
        out << "\nLowest mean cost: " << log.combinations[*log.best_cost].model << " on "
            << log.combinations[*log.best_cost].sample << "\n";
    if (log.best_f1)
        out << "Highest mean F1: " << log.combinations[*log.best_f1].model << " on "
            << log.combinations[*log.best_f1].sample << "\n";
}

// ---------------------------------------------------------------------------
// Trace and timings

inline void write_ga_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace)
{
    out << "iteration,sample,generation,best_fitness,mean_fitness,best_genome\n";
    for (const auto& t : trace)
        out << t.iteration << ',' << detail::csv_cell(t.sample) << ',' << t.stats.generation << ','
            << detail::money_text(t.stats.best_fitness) << ',' << detail::money_text(t.stats.mean_fitness) << ','
            << detail::genome_text(t.stats.best_genome) << '\n';
}

inline void write_timings_csv(std::ostream& out, const std::vector<ResultRow>& rows)
{
    out << "iteration,sample,model,role,wall_ms\n";
    for (const auto& r : rows)
        out << r.iteration << ',' << detail::csv_cell(sample_label(r.sample)) << ',' << detail::csv_cell(r.model)
            << ',' << to_string(r.role) << ',' << detail::format_sig(r.wall_ms, 6) << '\n';
}

// ---------------------------------------------------------------------------
// Output directory

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p)
{
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot write " + p.string());
    return f;
}

inline void finish(std::ofstream& f, const std::filesystem::path& p)
{
    f.flush();
    if (!f)
        throw IoError("write failed: " + p.string());
}

}  // namespace detail

/// Writes results.csv, master.json, summary.md, timings.csv and, when a trace
/// is given, ga_trace.csv into `dir` (created if missing).
inline void emit_report(const std::vector<ResultRow>& rows, const MasterLog& log, const std::string& dir,
                        const std::vector<TraceRow>& trace = {})
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory " + dir);
    const fs::path base(dir);

    auto emit = [&](const char* name, auto&& body) {
        const auto p = base / name;
        auto f = detail::open_output(p);
        body(f);
        detail::finish(f, p);
    };
    emit("results.csv", [&](std::ostream& o) { write_results_csv(o, rows); });
    emit("master.json", [&](std::ostream& o) { o << to_json(log).dump(2) << '\n'; });
    emit("summary.md", [&](std::ostream& o) { write_summary_md(o, log); });
    emit("timings.csv", [&](std::ostream& o) { write_timings_csv(o, rows); });
    if (!trace.empty())
        emit("ga_trace.csv", [&](std::ostream& o) { write_ga_trace_csv(o, trace); });
}

inline void emit_report(const RunResult& r, const std::string& dir)
{
    emit_report(r.rows, r.master, dir, r.ga_trace);
}

}  // namespace fraudbench
