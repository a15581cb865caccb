#pragma once

// Confusion-matrix bookkeeping, derived rates and the transaction-level fraud
// cost. Undefined ratios (zero denominator) are std::nullopt, never 0.

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraudbench/core.hpp"

namespace fraudbench {

/// Money held as integer micro-units so that sums are exact and order-independent.
class Money {
public:
    static constexpr std::int64_t kMicrosPerUnit = 1'000'000;

    constexpr Money() = default;
    static constexpr Money from_micros(std::int64_t m) noexcept { return Money(m); }
    static Money from_units(double units) { return Money(std::llround(units * static_cast<double>(kMicrosPerUnit))); }

    constexpr std::int64_t micros() const noexcept { return micros_; }
    constexpr double units() const noexcept { return static_cast<double>(micros_) / kMicrosPerUnit; }

    constexpr Money operator+(Money o) const noexcept { return Money(micros_ + o.micros_); }
    constexpr Money operator-(Money o) const noexcept { return Money(micros_ - o.micros_); }
    constexpr Money operator-() const noexcept { return Money(-micros_); }
    constexpr Money& operator+=(Money o) noexcept { micros_ += o.micros_; return *this; }
    constexpr Money& operator-=(Money o) noexcept { micros_ -= o.micros_; return *this; }
    constexpr Money operator*(std::int64_t k) const noexcept { return Money(micros_ * k); }
    /// Scale by a real factor, rounded to the nearest micro-unit.
    Money scaled(double f) const { return Money(std::llround(f * static_cast<double>(micros_))); }

    constexpr auto operator<=>(const Money&) const = default;

private:
    constexpr explicit Money(std::int64_t m) : micros_(m) {}
    std::int64_t micros_ = 0;
};

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

using Ratio = std::optional<double>;

struct MetricSet {
    Ratio tpr, fpr, tnr, fnr;
    Ratio ppv, npv, fdr, for_;
    Ratio precision;  // (PPV + NPV) / 2
    Ratio recall;     // (TPR + TNR) / 2
    Ratio accuracy;
    Ratio f1;
};

/// Cost constants in currency units. c_f applies to caught fraud, c_l to missed fraud, c_e to false alarms.
struct CostModel {
    double c_f = 10.0;
    double c_e = 5.0;
    double c_l = 10.0;
    double f_m = 2.40;

    bool operator==(const CostModel&) const = default;
};

inline CostModel default_cost_model() { return CostModel{}; }

inline void validate(const CostModel& cm)
{
    for (double v : {cm.c_f, cm.c_e, cm.c_l, cm.f_m})
        if (!std::isfinite(v) || v < 0.0)
            throw ParameterError("cost model constants must be finite and non-negative");
}

inline ConfusionCounts confusion(std::span<const Label> predicted, std::span<const Label> truth)
{
    if (predicted.size() != truth.size())
        throw InputError("confusion: " + std::to_string(predicted.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = is_fraud(predicted[i]);
        const bool t = is_fraud(truth[i]);
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

inline Ratio safe_ratio(std::uint64_t num, std::uint64_t den)
{
    if (den == 0)
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

/// F1 in its rate form 2 PPV TPR / (PPV + TPR).
inline Ratio f1_from_rates(Ratio ppv, Ratio tpr)
{
    if (!ppv || !tpr || *ppv + *tpr == 0.0)
        return std::nullopt;
    return 2.0 * (*ppv * *tpr) / (*ppv + *tpr);
}

inline MetricSet derive_metrics(const ConfusionCounts& c)
{
    MetricSet m;
    m.tpr = safe_ratio(c.tp, c.tp + c.fn);
    m.fnr = safe_ratio(c.fn, c.tp + c.fn);
    m.fpr = safe_ratio(c.fp, c.fp + c.tn);
    m.tnr = safe_ratio(c.tn, c.fp + c.tn);
    m.ppv = safe_ratio(c.tp, c.tp + c.fp);
    m.fdr = safe_ratio(c.fp, c.tp + c.fp);
    m.npv = safe_ratio(c.tn, c.tn + c.fn);
    m.for_ = safe_ratio(c.fn, c.tn + c.fn);
    if (m.ppv && m.npv)
        m.precision = (*m.ppv + *m.npv) / 2.0;
    if (m.tpr && m.tnr)
        m.recall = (*m.tpr + *m.tnr) / 2.0;
    m.accuracy = safe_ratio(c.tp + c.tn, c.total());
    m.f1 = safe_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    return m;
}

/// Total fraud cost:
///   TP c_f + FN c_l + FP c_e + sum_{FN} f_m T_i - sum_{TP} T_i
/// Negative values are net savings.
inline Money fraud_cost(std::span<const Label> predicted, std::span<const Label> truth,
                        std::span<const double> amounts, const CostModel& cm)
{
    if (predicted.size() != truth.size() || predicted.size() != amounts.size())
        throw InputError("fraud_cost: predicted, truth and amounts must have equal lengths");
    const Money c_f = Money::from_units(cm.c_f);
    const Money c_l = Money::from_units(cm.c_l);
    const Money c_e = Money::from_units(cm.c_e);

    std::int64_t tp = 0, fn = 0, fp = 0;
    Money missed, caught;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (!(amounts[i] >= 0.0) || !std::isfinite(amounts[i]))
            throw InputError("fraud_cost: amounts must be finite and non-negative");
        const bool p = is_fraud(predicted[i]);
        const bool t = is_fraud(truth[i]);
        if (t && p) {
            ++tp;
            caught += Money::from_units(amounts[i]);
        } else if (t) {
            ++fn;
            missed += Money::from_units(amounts[i]).scaled(cm.f_m);
        } else if (p) {
            ++fp;
        }
    }
    return c_f * tp + c_l * fn + c_e * fp + missed - caught;
}

/// Convenience overload over transactions.
inline Money fraud_cost(std::span<const Label> predicted, std::span<const Transaction> records, const CostModel& cm)
{
    std::vector<Label> truth(records.size());
    std::vector<double> amounts(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        truth[i] = records[i].label;
        amounts[i] = records[i].amount;
    }
    return fraud_cost(predicted, truth, amounts, cm);
}

}  // namespace fraudbench
