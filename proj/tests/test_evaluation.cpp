#include <gtest/gtest.h>

#include "fraudbench/evaluation.hpp"
#include "fraudbench/random.hpp"

using namespace fraudbench;

namespace {

std::vector<Label> stream(std::size_t fraud, std::size_t clean)
{
    std::vector<Label> v(fraud, Label::fraud);
    v.insert(v.end(), clean, Label::clean);
    return v;
}

/// Label streams realizing the given counts.
std::pair<std::vector<Label>, std::vector<Label>> streams(const ConfusionCounts& c)
{
    std::vector<Label> p, t;
    auto push = [&](std::uint64_t n, Label pl, Label tl) {
        p.insert(p.end(), n, pl);
        t.insert(t.end(), n, tl);
    };
    push(c.tp, Label::fraud, Label::fraud);
    push(c.fp, Label::fraud, Label::clean);
    push(c.tn, Label::clean, Label::clean);
    push(c.fn, Label::clean, Label::fraud);
    return {p, t};
}

/// Record-by-record cost in micro-units.
std::int64_t brute_cost(const std::vector<Label>& p, const std::vector<Label>& t, const std::vector<double>& a,
                        const CostModel& cm)
{
    auto micros = [](double u) { return std::llround(u * 1e6); };
    std::int64_t total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool pf = is_fraud(p[i]), tf = is_fraud(t[i]);
        if (pf && tf)
            total += micros(cm.c_f) - micros(a[i]);
        else if (tf)
            total += micros(cm.c_l) + std::llround(cm.f_m * static_cast<double>(micros(a[i])));
        else if (pf)
            total += micros(cm.c_e);
    }
    return total;
}

}  // namespace

TEST(Confusion, PerfectClassifier)
{
    const auto t = stream(3, 7);
    EXPECT_EQ(confusion(t, t), (ConfusionCounts{3, 0, 7, 0}));
}

TEST(Confusion, AllCleanPredictionsMissEveryFraud)
{
    const ConfusionCounts counts{348, 6544, 277542, 45};
    const auto [p, t] = streams(counts);
    EXPECT_EQ(confusion(p, t), counts);
    const std::vector<Label> never(t.size(), Label::clean);
    const auto c = confusion(never, t);
    EXPECT_EQ(c.tp, 0u);
    EXPECT_EQ(c.fn, 393u);
    EXPECT_EQ(c.total(), t.size());
}

TEST(Confusion, LengthMismatch)
{
    EXPECT_THROW(confusion(stream(1, 1), stream(1, 2)), InputError);
}

TEST(Metrics, KnownCountsMatchHandComputedPercentages)
{
    const auto svc = derive_metrics({348, 6544, 277542, 45});
    EXPECT_NEAR(100 * *svc.tpr, 88.55, 0.01);
    EXPECT_NEAR(100 * *svc.ppv, 5.05, 0.01);
    EXPECT_NEAR(100 * *svc.npv, 99.98, 0.01);
    EXPECT_NEAR(100 * *svc.tnr, 97.70, 0.01);
    EXPECT_NEAR(100 * *svc.f1, 9.56, 0.01);
    const auto rf = derive_metrics({341, 2911, 281175, 53});
    EXPECT_NEAR(100 * *rf.f1, 18.70, 0.01);
}

TEST(Metrics, ComplementsAndAveragedForms)
{
    for (const ConfusionCounts c : {ConfusionCounts{5, 3, 90, 2}, ConfusionCounts{349, 5278, 278807, 45},
                                    ConfusionCounts{1, 0, 0, 1}}) {
        const auto m = derive_metrics(c);
        EXPECT_NEAR(*m.tpr + *m.fnr, 1.0, 1e-15);
        if (m.fpr) {
            EXPECT_NEAR(*m.fpr + *m.tnr, 1.0, 1e-15);
        }
        EXPECT_NEAR(*m.ppv + *m.fdr, 1.0, 1e-15);
        if (m.npv) {
            EXPECT_NEAR(*m.npv + *m.for_, 1.0, 1e-15);
            EXPECT_NEAR(*m.precision, (*m.ppv + *m.npv) / 2, 1e-15);
        }
        if (m.tnr) {
            EXPECT_NEAR(*m.recall, (*m.tpr + *m.tnr) / 2, 1e-15);
        }
        EXPECT_NEAR(*m.accuracy, double(c.tp + c.tn) / double(c.total()), 1e-15);
        EXPECT_NEAR(*m.f1, *f1_from_rates(m.ppv, m.tpr), 1e-12);
    }
}

TEST(Metrics, UndefinedRatiosAreMarked)
{
    const auto m = derive_metrics({0, 0, 20, 0});
    EXPECT_FALSE(m.ppv.has_value());
    EXPECT_FALSE(m.tpr.has_value());
    EXPECT_FALSE(m.f1.has_value());
    EXPECT_FALSE(m.precision.has_value());
    EXPECT_DOUBLE_EQ(*m.tnr, 1.0);
    EXPECT_DOUBLE_EQ(*m.accuracy, 1.0);
    const auto empty = derive_metrics({});
    EXPECT_FALSE(empty.accuracy.has_value());
}

TEST(Cost, HandEvaluatedCases)
{
    const auto cm = default_cost_model();
    EXPECT_DOUBLE_EQ(cm.f_m, 2.40);
    EXPECT_EQ(cm.c_f, cm.c_l);
    EXPECT_LT(cm.c_e, cm.c_f);
    const std::vector<Label> f{Label::fraud}, c{Label::clean};
    const std::vector<double> hundred{100.0};
    EXPECT_EQ(fraud_cost(f, f, hundred, cm), Money::from_units(-90));
    EXPECT_EQ(fraud_cost(c, f, hundred, cm), Money::from_units(250));
    EXPECT_EQ(fraud_cost(f, c, hundred, cm), Money::from_units(cm.c_e));
    EXPECT_EQ(fraud_cost(stream(0, 5), stream(0, 5), std::vector<double>(5, 3.0), cm), Money{});
}

TEST(Cost, ErrorsOnBadInput)
{
    const auto cm = default_cost_model();
    EXPECT_THROW(fraud_cost(stream(1, 0), stream(1, 1), std::vector<double>(2, 1.0), cm), InputError);
    EXPECT_THROW(fraud_cost(stream(1, 0), stream(1, 0), std::vector<double>{-1.0}, cm), InputError);
    EXPECT_THROW(validate(CostModel{10, -1, 10, 2.4}), ParameterError);
}

TEST(Cost, MatchesBruteForceAndIsAdditive)
{
    Rng rng(5);
    const CostModel cm{10.0, 5.0, 10.0, 2.4};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(500);
        std::vector<Label> p(n), t(n);
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = rng.bernoulli(0.2) ? Label::fraud : Label::clean;
            t[i] = rng.bernoulli(0.2) ? Label::fraud : Label::clean;
            a[i] = std::round(rng.uniform() * 500000.0) / 100.0;
        }
        const Money whole = fraud_cost(p, t, a, cm);
        EXPECT_EQ(whole.micros(), brute_cost(p, t, a, cm));
        const std::size_t cut = rng.index(n + 1);
        auto part = [&](std::size_t lo, std::size_t hi) {
            return fraud_cost(std::span(p).subspan(lo, hi - lo), std::span(t).subspan(lo, hi - lo),
                              std::span<const double>(a).subspan(lo, hi - lo), cm);
        };
        EXPECT_EQ(whole, part(0, cut) + part(cut, n));
    }
}

TEST(Money, ExactArithmetic)
{
    const auto a = Money::from_units(0.1);
    EXPECT_EQ(a.micros(), 100000);
    EXPECT_EQ((a * 3).micros(), 300000);
    EXPECT_EQ(Money::from_units(12.345678).scaled(2.4).micros(), 29629627);
    EXPECT_LT(Money::from_units(-1), Money{});
}
