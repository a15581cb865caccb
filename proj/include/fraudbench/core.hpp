#pragma once

// Transaction records, dataset CSV I/O, the synthetic generator and the
// sample/test partition.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fraudbench/error.hpp"
#include "fraudbench/random.hpp"

namespace fraudbench {

inline constexpr std::size_t kFeatureCount = 28;

enum class Label : std::uint8_t { clean = 0, fraud = 1 };

constexpr bool is_fraud(Label l) noexcept { return l == Label::fraud; }

struct Transaction {
    std::array<double, kFeatureCount> features{};  // V1..V28
    double time = 0.0;                              // seconds offset, unused by models
    double amount = 0.0;                            // currency units
    Label label = Label::clean;

    bool operator==(const Transaction&) const = default;
};

/// Throws InputError if the record breaks the Transaction invariants.
inline void validate(const Transaction& t)
{
    for (double v : t.features)
        if (!std::isfinite(v))
            throw InputError("non-finite feature value");
    if (!std::isfinite(t.time))
        throw InputError("non-finite time");
    if (!std::isfinite(t.amount) || t.amount < 0.0)
        throw InputError("amount must be finite and non-negative");
}

/// Immutable collection of transactions with cached class counts.
class Dataset {
public:
    Dataset() = default;

    explicit Dataset(std::vector<Transaction> records) : records_(std::move(records))
    {
        for (const auto& r : records_) {
            validate(r);
            if (is_fraud(r.label))
                ++fraud_count_;
        }
    }

    std::span<const Transaction> records() const noexcept { return records_; }
    const Transaction& operator[](std::size_t i) const { return records_[i]; }
    std::size_t total_count() const noexcept { return records_.size(); }
    std::size_t size() const noexcept { return records_.size(); }
    std::size_t fraud_count() const noexcept { return fraud_count_; }
    std::size_t clean_count() const noexcept { return records_.size() - fraud_count_; }
    bool empty() const noexcept { return records_.empty(); }
    double fraud_rate() const noexcept
    {
        return records_.empty() ? 0.0 : static_cast<double>(fraud_count_) / static_cast<double>(records_.size());
    }

    auto begin() const noexcept { return records_.begin(); }
    auto end() const noexcept { return records_.end(); }

    bool operator==(const Dataset& o) const { return records_ == o.records_; }

private:
    std::vector<Transaction> records_;
    std::size_t fraud_count_ = 0;
};

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::string> dataset_columns()
{
    std::vector<std::string> cols{"Time"};
    for (std::size_t i = 1; i <= kFeatureCount; ++i)
        cols.push_back("V" + std::to_string(i));
    cols.emplace_back("Amount");
    cols.emplace_back("Class");
    return cols;
}

namespace detail {

inline std::string_view trim_cell(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim_cell(line.substr(start)));
            return out;
        }
        out.push_back(trim_cell(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline bool parse_double(std::string_view s, double& out)
{
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

/// Shortest text that reads back to the same double.
inline std::string format_exact(double v)
{
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

inline std::string format_sig(double v, int digits)
{
    std::array<char, 40> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, digits);
    return std::string(buf.data(), p);
}

}  // namespace detail

/// Reads the Time,V1..V28,Amount,Class schema. Column order in the header may
/// vary; every column must be present exactly once.
inline Dataset read_dataset(std::istream& in)
{
    const auto expected = dataset_columns();
    std::string line;
    if (!std::getline(in, line))
        throw EmptyDatasetError("missing header row");

    // position in row -> expected column index
    const auto header = detail::split_csv(line);
    std::vector<int> slot_of(expected.size(), -1);
    for (std::size_t pos = 0; pos < header.size(); ++pos) {
        auto it = std::find(expected.begin(), expected.end(), header[pos]);
        if (it == expected.end())
            throw SchemaError(std::string(header[pos]), "unexpected column");
        auto idx = static_cast<std::size_t>(it - expected.begin());
        if (slot_of[idx] != -1)
            throw SchemaError(*it, "duplicate column");
        slot_of[idx] = static_cast<int>(pos);
    }
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (slot_of[i] == -1)
            throw SchemaError(expected[i], "missing column");

    std::vector<Transaction> records;
    std::vector<double> values(expected.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        ++row;
        const auto cells = detail::split_csv(line);
        if (cells.size() != expected.size())
            throw ParseError(row, "expected " + std::to_string(expected.size()) + " fields, got " +
                                      std::to_string(cells.size()));
        for (std::size_t i = 0; i < expected.size(); ++i) {
            auto cell = cells[static_cast<std::size_t>(slot_of[i])];
            if (!detail::parse_double(cell, values[i]))
                throw ParseError(row, "non-numeric value '" + std::string(cell) + "' in column " + expected[i]);
            if (!std::isfinite(values[i]))
                throw ParseError(row, "non-finite value in column " + expected[i]);
        }
        Transaction t;
        t.time = values[0];
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            t.features[j] = values[1 + j];
        t.amount = values[kFeatureCount + 1];
        if (t.amount < 0.0)
            throw ParseError(row, "negative Amount");
        const double cls = values[kFeatureCount + 2];
        if (cls != 0.0 && cls != 1.0)
            throw ParseError(row, "Class must be 0 or 1");
        t.label = cls == 1.0 ? Label::fraud : Label::clean;
        records.push_back(t);
    }
    if (records.empty())
        throw EmptyDatasetError("dataset has no data rows");
    return Dataset(std::move(records));
}

inline Dataset load_dataset(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open dataset file: " + path);
    return read_dataset(in);
}

/// Header plus one row per record, values at 9 significant digits, LF endings.
/// With `with_flags` a trailing Synthetic 0/1 column is taken from `synthetic_flags`.
inline void write_dataset(std::ostream& out, std::span<const Transaction> records,
                          const std::vector<bool>& synthetic_flags = {}, bool with_flags = false)
{
    const auto cols = dataset_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    if (with_flags && synthetic_flags.size() != records.size())
        throw InputError("write_dataset: synthetic flag count mismatch");
    if (with_flags)
        out << ",Synthetic";
    out << '\n';
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& t = records[r];
        out << detail::format_sig(t.time, 9);
        for (double v : t.features)
            out << ',' << detail::format_sig(v, 9);
        out << ',' << detail::format_sig(t.amount, 9) << ',' << (is_fraud(t.label) ? '1' : '0');
        if (with_flags)
            out << ',' << (synthetic_flags[r] ? '1' : '0');
        out << '\n';
    }
}

inline void write_dataset(const std::string& path, const Dataset& data)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write dataset file: " + path);
    write_dataset(out, data.records());
    if (!out)
        throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Shape of the synthetic generator. Legitimate features are N(0, 1); fraud
/// features are N(shift, spread^2) with the shift applied (alternating sign) to
/// the first `signal_dims` features. Fraud is therefore displaced and more
/// dispersed than the legitimate mass, as in the anonymized card data.
struct SyntheticShape {
    std::size_t signal_dims = 8;
    double shift = 2.0;
    double spread = 2.0;
    double tail_rate = 0.02;  // share of legitimate records with inflated spread
    double tail_sd = 5.0;
    double amount_log_median = 2.995732273553991;        // ln(20)
    double fraud_amount_log_median = 3.401197381662155;  // ln(30)
    double amount_log_sigma = 1.67;
    double time_span = 172800.0;                    // two days
};

/// Deterministic generator; exactly round(n * fraud_rate) fraud records placed
/// at uniformly random positions.
inline Dataset generate_synthetic(std::size_t n, double fraud_rate, std::uint64_t seed,
                                  const SyntheticShape& shape = {})
{
    if (n < 10)
        throw ParameterError("generate_synthetic: n must be at least 10");
    if (!(fraud_rate > 0.0 && fraud_rate < 1.0))
        throw ParameterError("generate_synthetic: fraud_rate must lie in (0, 1)");
    const auto n_fraud = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraud_rate));
    if (n_fraud == 0)
        throw ParameterError("generate_synthetic: fraud_rate yields zero fraud records");
    if (n_fraud >= n)
        throw ParameterError("generate_synthetic: fraud_rate yields no legitimate records");

    Rng rng(seed);
    std::vector<Label> labels(n, Label::clean);
    {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < n_fraud; ++i) {
            std::size_t j = i + rng.index(n - i);
            std::swap(idx[i], idx[j]);
            labels[idx[i]] = Label::fraud;
        }
    }

    std::vector<Transaction> records(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& t = records[i];
        t.label = labels[i];
        t.time = std::floor(shape.time_span * static_cast<double>(i) / static_cast<double>(n));
        const bool fraud = is_fraud(t.label);
        const double base_sd = !fraud && rng.uniform() < shape.tail_rate ? shape.tail_sd : 1.0;
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            double mean = 0.0;
            double sd = base_sd;
            if (fraud) {
                sd = shape.spread;
                if (j < shape.signal_dims)
                    mean = (j % 2 == 0) ? shape.shift : -shape.shift;
            }
            t.features[j] = rng.normal(mean, sd);
        }
        const double log_median = fraud ? shape.fraud_amount_log_median : shape.amount_log_median;
        const double amount = std::exp(rng.normal(log_median, shape.amount_log_sigma));
        t.amount = std::round(amount * 100.0) / 100.0;
    }
    return Dataset(std::move(records));
}

// ---------------------------------------------------------------------------
// Partition

/// m distinct indices from [0, n), sorted ascending.
inline std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t m, Rng& rng)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i)
        std::swap(idx[i], idx[i + rng.index(n - i)]);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct Partition {
    Dataset sample_pool;
    Dataset test_pool;
    std::uint64_t seed = 0;
    std::vector<std::size_t> sample_indices;  // positions in the source dataset, ascending
};

/// Uniform (unstratified) split. Both pools must keep at least one fraud record.
inline Partition partition(const Dataset& data, double sample_fraction, std::uint64_t seed)
{
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        throw ParameterError("partition: sample_fraction must lie in (0, 1)");
    const auto m = static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(data.size())));

    Rng rng(seed);
    auto chosen = draw_without_replacement(data.size(), m, rng);

    std::vector<Transaction> sample;
    std::vector<Transaction> test;
    sample.reserve(m);
    test.reserve(data.size() - m);
    std::size_t c = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (c < chosen.size() && chosen[c] == i) {
            sample.push_back(data[i]);
            ++c;
        } else {
            test.push_back(data[i]);
        }
    }
    Partition p{Dataset(std::move(sample)), Dataset(std::move(test)), seed, std::move(chosen)};
    if (p.sample_pool.fraud_count() == 0 || p.test_pool.fraud_count() == 0)
        throw DegeneratePartitionError("partition left a pool without fraud records (seed " +
                                       std::to_string(seed) + ")");
    return p;
}

}  // namespace fraudbench
