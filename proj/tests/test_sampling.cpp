#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fraudbench/sampling.hpp"
#include "test_support.hpp"

using namespace fraudbench;

TEST(Undersample, KeepsAllFraudAndDrawsClosedFormMajority)
{
    const auto p80 = testsupport::pool(80, 1000, 1);
    const auto s80 = undersample(p80, 0.5, 2);
    EXPECT_EQ(s80.size(), 160u);
    EXPECT_EQ(s80.fraud_count(), 80u);

    const auto p100 = testsupport::pool(100, 1000, 3);
    EXPECT_EQ(undersample(p100, 0.5, 4).size(), 200u);
    const auto s30 = undersample(p100, 0.3, 4);
    EXPECT_EQ(s30.size() - s30.fraud_count(), 233u);
    EXPECT_EQ(s30.leftover.size(), 1000u - 233u);
    EXPECT_EQ(s30.synthetic_count(), 0u);
}

TEST(Undersample, InfeasibleAndInvalidRatios)
{
    const auto p = testsupport::pool(100, 150, 1);
    EXPECT_THROW(undersample(p, 0.3, 1), InfeasibleError);
    EXPECT_THROW(undersample(p, 0.0, 1), ParameterError);
    EXPECT_THROW(undersample(p, 1.0, 1), ParameterError);
    EXPECT_THROW(undersample(testsupport::pool(0, 10, 1), 0.5, 1), InfeasibleError);
}

TEST(Undersample, DeterministicAndDisjointFromLeftover)
{
    const auto p = testsupport::pool(50, 500, 9);
    const auto a = undersample(p, 0.2, 77);
    const auto b = undersample(p, 0.2, 77);
    EXPECT_EQ(a.records, b.records);
    EXPECT_EQ(a.size() + a.leftover.size(), p.size());
    for (const auto& t : a.leftover)
        EXPECT_EQ(std::count(a.records.begin(), a.records.end(), t), 0);
}

TEST(KnnMinority, LineToyCase)
{
    std::vector<Transaction> minority(3);
    minority[0].features[0] = 0.0;
    minority[1].features[0] = 1.0;
    minority[2].features[0] = 5.0;
    Transaction q;
    const std::vector<Transaction> rest{minority[1], minority[2]};
    const auto nn = knn_minority(q, rest, 1);
    ASSERT_EQ(nn.size(), 1u);
    EXPECT_DOUBLE_EQ(nn[0].features[0], 1.0);
}

TEST(KnnMinority, WholeSetAndTooLargeK)
{
    const auto p = testsupport::pool(12, 0, 5);
    const std::vector<Transaction> minority(p.begin() + 1, p.end());
    auto all = knn_minority(p[0], minority, minority.size());
    EXPECT_EQ(all.size(), minority.size());
    auto sorted_in = minority;
    auto key = [](const Transaction& a, const Transaction& b) { return a.time < b.time; };
    std::sort(all.begin(), all.end(), key);
    std::sort(sorted_in.begin(), sorted_in.end(), key);
    EXPECT_EQ(all, sorted_in);
    EXPECT_THROW(knn_minority(p[0], minority, minority.size() + 1), ParameterError);
}

TEST(KnnMinority, MatchesExhaustiveSortOracle)
{
    const auto p = testsupport::pool(101, 0, 13);
    const Transaction query = p[0];
    const std::vector<Transaction> minority(p.begin() + 1, p.end());

    std::vector<Transaction> everything = minority;
    everything.push_back(query);
    double mean = 0.0;
    for (const auto& t : everything)
        mean += t.amount;
    mean /= static_cast<double>(everything.size());
    double var = 0.0;
    for (const auto& t : everything)
        var += (t.amount - mean) * (t.amount - mean);
    const double sd = std::sqrt(var / static_cast<double>(everything.size()));

    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < minority.size(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            d += std::pow(query.features[j] - minority[i].features[j], 2);
        d += std::pow((query.amount - minority[i].amount) / sd, 2);
        dist.emplace_back(d, i);
    }
    std::sort(dist.begin(), dist.end());

    const auto nn = knn_minority(query, minority, 5);
    ASSERT_EQ(nn.size(), 5u);
    for (std::size_t r = 0; r < 5; ++r)
        EXPECT_EQ(nn[r], minority[dist[r].second]);
}

TEST(SmoteSynthesize, DegenerateAndInterpolatedCases)
{
    const auto p = testsupport::pool(2, 0, 3);
    const Transaction o = p[0], n = p[1];
    auto s0 = smote_synthesize(o, n, 0.0);
    EXPECT_EQ(s0.features, o.features);
    EXPECT_EQ(s0.amount, o.amount);
    EXPECT_EQ(s0.label, Label::fraud);

    const auto same = smote_synthesize(o, o, 0.73);
    EXPECT_EQ(same.features, o.features);

    Transaction zero, one;
    one.features.fill(1.0);
    one.amount = 1.0;
    zero.label = one.label = Label::fraud;
    const auto q = smote_synthesize(zero, one, 0.25);
    for (double f : q.features)
        EXPECT_DOUBLE_EQ(f, 0.25);
    EXPECT_DOUBLE_EQ(q.amount, 0.25);
}

TEST(SmoteSample, TopsUpMinorityToTarget)
{
    const auto p = testsupport::pool(100, 2000, 21);
    SampleSpec spec{SampleMethod::smote, 1000, 0.5, 5, 8};
    const auto s = smote_sample(p, spec);
    EXPECT_EQ(s.size(), 1000u);
    EXPECT_EQ(s.fraud_count(), 500u);
    EXPECT_EQ(s.synthetic_count(), 400u);
    EXPECT_DOUBLE_EQ(s.achieved_ratio, 0.5);
    EXPECT_EQ(s.leftover.size(), 1500u);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.synthetic_flags[i]) {
            EXPECT_EQ(s.records[i].label, Label::fraud);
        }
}

TEST(SmoteSample, NoSynthesisWhenRealFraudSuffices)
{
    const auto p = testsupport::pool(100, 2000, 21);
    SampleSpec spec{SampleMethod::smote, 1000, 0.1, 5, 8};
    const auto s = smote_sample(p, spec);
    EXPECT_EQ(s.synthetic_count(), 0u);
    EXPECT_EQ(s.fraud_count(), 100u);
    EXPECT_NEAR(s.achieved_ratio, 0.1, 1.0 / static_cast<double>(s.size()));
}

TEST(SmoteSample, SyntheticRecordsStayInsideMinorityBoundingBox)
{
    const auto p = testsupport::pool(60, 3000, 31);
    SampleSpec spec{SampleMethod::smote, 2000, 0.4, 5, 17};
    const auto s = smote_sample(p, spec);
    std::array<double, kFeatureCount> lo, hi;
    lo.fill(1e300);
    hi.fill(-1e300);
    double alo = 1e300, ahi = -1e300;
    for (const auto& t : p)
        if (is_fraud(t.label)) {
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                lo[j] = std::min(lo[j], t.features[j]);
                hi[j] = std::max(hi[j], t.features[j]);
            }
            alo = std::min(alo, t.amount);
            ahi = std::max(ahi, t.amount);
        }
    std::size_t checked = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.synthetic_flags[i])
            continue;
        ++checked;
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            EXPECT_GE(s.records[i].features[j], lo[j]);
            EXPECT_LE(s.records[i].features[j], hi[j]);
        }
        EXPECT_GE(s.records[i].amount, alo);
        EXPECT_LE(s.records[i].amount, ahi);
    }
    EXPECT_EQ(checked, 800u - 60u);
}

TEST(SmoteSample, ErrorsAndDeterminism)
{
    const auto p = testsupport::pool(100, 300, 2);
    EXPECT_THROW(smote_sample(p, SampleSpec{SampleMethod::smote, 1000, 0.5, 5, 1}), InfeasibleError);
    EXPECT_THROW(smote_sample(testsupport::pool(4, 300, 2), SampleSpec{SampleMethod::smote, 100, 0.5, 5, 1}),
                 InfeasibleError);
    EXPECT_THROW(smote_sample(p, SampleSpec{SampleMethod::smote, 100, 0.5, 0, 1}), ParameterError);
    const SampleSpec spec{SampleMethod::smote, 400, 0.5, 3, 5};
    EXPECT_EQ(smote_sample(p, spec).records, smote_sample(p, spec).records);
}

TEST(SimpleSample, FullPoolAndDeterminism)
{
    const auto p = testsupport::pool(10, 90, 4);
    const auto all = simple_sample(p, p.size(), 1);
    EXPECT_EQ(all.size(), p.size());
    EXPECT_TRUE(all.leftover.empty());
    EXPECT_TRUE(std::equal(all.records.begin(), all.records.end(), p.begin()));

    const auto a = simple_sample(p, 50, 12);
    const auto b = simple_sample(p, 50, 12);
    EXPECT_EQ(a.records, b.records);
    EXPECT_EQ(a.leftover.size(), 50u);
    EXPECT_THROW(simple_sample(p, 101, 1), ParameterError);
}

TEST(BuildSample, AchievedRatioWithinOneRecord)
{
    const auto p = testsupport::pool(97, 5000, 8);
    for (double r : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        const auto u = build_sample(p, SampleSpec{SampleMethod::undersample, 0, r, 5, 3});
        EXPECT_LE(std::abs(u.achieved_ratio - r), 1.0 / static_cast<double>(u.size()));
        for (std::size_t n : {1000u, 3000u}) {
            const auto s = build_sample(p, SampleSpec{SampleMethod::smote, n, r, 5, 3});
            EXPECT_LE(std::abs(s.achieved_ratio - r), 1.0 / static_cast<double>(s.size()));
        }
    }
}

TEST(BuildSample, MethodNamesRoundTrip)
{
    for (auto m : {SampleMethod::simple, SampleMethod::undersample, SampleMethod::smote})
        EXPECT_EQ(sample_method_from_string(to_string(m)), m);
    EXPECT_THROW(sample_method_from_string("oversample"), ParameterError);
}

TEST(WriteSample, AddsSyntheticColumn)
{
    const auto p = testsupport::pool(20, 200, 4);
    const auto s = smote_sample(p, SampleSpec{SampleMethod::smote, 100, 0.4, 3, 1});
    std::stringstream out;
    write_sample(out, s);
    std::string line;
    std::size_t rows = 0, flagged = 0;
    std::getline(out, line);
    EXPECT_NE(line.find(",Synthetic"), std::string::npos);
    while (std::getline(out, line)) {
        ++rows;
        flagged += line.back() == '1' ? 1 : 0;
    }
    EXPECT_EQ(rows, s.size());
    EXPECT_EQ(flagged, s.synthetic_count());
}
