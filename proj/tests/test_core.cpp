#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fraudbench/core.hpp"
#include "fraudbench/classifiers.hpp"
#include "test_support.hpp"

using namespace fraudbench;

namespace {

std::string header_line()
{
    std::string h;
    for (const auto& c : dataset_columns())
        h += (h.empty() ? "" : ",") + c;
    return h;
}

std::string row_line(double time, double fill, double amount, int cls)
{
    std::ostringstream os;
    os << time;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        os << ',' << fill + static_cast<double>(i);
    os << ',' << amount << ',' << cls;
    return os.str();
}

}  // namespace

TEST(Dataset, CountsAndAccessors)
{
    std::vector<Transaction> v(5);
    v[1].label = Label::fraud;
    v[3].label = Label::fraud;
    Dataset d(v);
    EXPECT_EQ(d.total_count(), 5u);
    EXPECT_EQ(d.fraud_count(), 2u);
    EXPECT_EQ(d.clean_count(), 3u);
    EXPECT_DOUBLE_EQ(d.fraud_rate(), 0.4);
    EXPECT_TRUE(is_fraud(d[3].label));
}

TEST(Dataset, RejectsInvalidRecords)
{
    std::vector<Transaction> v(1);
    v[0].amount = -1.0;
    EXPECT_THROW(Dataset{v}, InputError);
    v[0].amount = 1.0;
    v[0].features[4] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(Dataset{v}, InputError);
}

TEST(ReadDataset, ParsesRowsInHeaderOrder)
{
    std::stringstream in;
    in << header_line() << "\n" << row_line(0, 0.5, 12.25, 0) << "\n" << row_line(7, -1, 3, 1) << "\n";
    const Dataset d = read_dataset(in);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.fraud_count(), 1u);
    EXPECT_DOUBLE_EQ(d[0].amount, 12.25);
    EXPECT_DOUBLE_EQ(d[0].features[27], 27.5);
    EXPECT_DOUBLE_EQ(d[1].time, 7.0);
    EXPECT_EQ(d[1].label, Label::fraud);
}

TEST(ReadDataset, AcceptsPermutedColumnsQuotesAndCrlf)
{
    auto cols = dataset_columns();
    std::reverse(cols.begin(), cols.end());
    std::string header;
    for (const auto& c : cols)
        header += (header.empty() ? "" : ",") + ("\"" + c + "\"");
    std::stringstream in;
    in << header << "\r\n";
    // reversed: Class, Amount, V28..V1, Time
    in << "\"1\",40.5";
    for (int i = 28; i >= 1; --i)
        in << ',' << i;
    in << ",99\r\n";
    const Dataset d = read_dataset(in);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].label, Label::fraud);
    EXPECT_DOUBLE_EQ(d[0].amount, 40.5);
    EXPECT_DOUBLE_EQ(d[0].features[0], 1.0);
    EXPECT_DOUBLE_EQ(d[0].features[27], 28.0);
    EXPECT_DOUBLE_EQ(d[0].time, 99.0);
}

TEST(ReadDataset, SchemaErrorsNameTheColumn)
{
    {
        std::stringstream in(header_line() + ",Extra\n");
        try {
            read_dataset(in);
            FAIL();
        } catch (const SchemaError& e) {
            EXPECT_EQ(e.column(), "Extra");
        }
    }
    {
        auto h = header_line();
        h.erase(h.find(",V13"), 4);
        std::stringstream in(h + "\n");
        try {
            read_dataset(in);
            FAIL();
        } catch (const SchemaError& e) {
            EXPECT_EQ(e.column(), "V13");
        }
    }
    {
        std::stringstream in(header_line() + ",Amount\n");
        EXPECT_THROW(read_dataset(in), SchemaError);
    }
}

TEST(ReadDataset, ParseErrorsCarryRowIndex)
{
    std::stringstream in;
    in << header_line() << "\n" << row_line(0, 0, 1, 0) << "\n";
    auto bad = row_line(1, 0, 1, 0);
    bad.replace(bad.find(",5,"), 3, ",x5,");
    in << bad << "\n";
    try {
        read_dataset(in);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
    }
}

TEST(ReadDataset, RejectsBadValues)
{
    auto parse = [](const std::string& row) {
        std::stringstream in(header_line() + "\n" + row + "\n");
        return read_dataset(in);
    };
    EXPECT_THROW(parse(row_line(0, 0, -3, 0)), ParseError);
    EXPECT_THROW(parse(row_line(0, 0, 3, 2)), ParseError);
    EXPECT_THROW(parse("1,2,3"), ParseError);
    auto inf = row_line(0, 0, 3, 0);
    inf.replace(0, 1, "inf");
    EXPECT_THROW(parse(inf), ParseError);
}

TEST(ReadDataset, HeaderOnlyIsEmpty)
{
    std::stringstream in(header_line() + "\n");
    EXPECT_THROW(read_dataset(in), EmptyDatasetError);
    std::stringstream nothing;
    EXPECT_THROW(read_dataset(nothing), EmptyDatasetError);
}

TEST(LoadDataset, MissingFileIsIoError)
{
    EXPECT_THROW(load_dataset("/nonexistent/dir/file.csv"), IoError);
}

TEST(WriteDataset, RoundTripsAtNineSignificantDigits)
{
    const Dataset d = generate_synthetic(500, 0.05, 3);
    std::stringstream buf;
    write_dataset(buf, d.records());
    EXPECT_EQ(buf.str().find('\r'), std::string::npos);
    const Dataset back = read_dataset(buf);
    ASSERT_EQ(back.size(), d.size());
    EXPECT_EQ(back.fraud_count(), d.fraud_count());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(back[i].label, d[i].label);
        EXPECT_NEAR(back[i].amount, d[i].amount, 1e-8 * std::max(1.0, std::abs(d[i].amount)));
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            EXPECT_NEAR(back[i].features[j], d[i].features[j], 1e-8 * std::max(1.0, std::abs(d[i].features[j])));
    }
    // a second trip through text is exact
    std::stringstream again;
    write_dataset(again, back.records());
    EXPECT_EQ(again.str(), [&] {
        std::stringstream s;
        write_dataset(s, back.records());
        return s.str();
    }());
    EXPECT_EQ(read_dataset(again), back);
}

TEST(WriteDataset, FileRoundTripPreservesGeneratorCounts)
{
    const Dataset d = generate_synthetic(2000, 0.01, 5);
    const auto path = testing::TempDir() + "fraudbench_synthetic.csv";
    write_dataset(path, d);
    const Dataset back = load_dataset(path);
    EXPECT_EQ(back.total_count(), 2000u);
    EXPECT_EQ(back.fraud_count(), 20u);
}

TEST(WriteDataset, SyntheticColumnNeedsMatchingFlags)
{
    const Dataset d = generate_synthetic(20, 0.1, 1);
    std::stringstream out;
    EXPECT_THROW(write_dataset(out, d.records(), std::vector<bool>(3, false), true), InputError);
    std::stringstream ok;
    write_dataset(ok, d.records(), std::vector<bool>(20, true), true);
    std::string header;
    std::getline(ok, header);
    EXPECT_EQ(header.substr(header.size() - 10), ",Synthetic");
    std::string first;
    std::getline(ok, first);
    EXPECT_EQ(first.substr(first.size() - 2), ",1");
}

TEST(Synthetic, FraudCountIsRounded)
{
    EXPECT_EQ(generate_synthetic(10'000, 0.002, 1).fraud_count(), 20u);
    EXPECT_EQ(generate_synthetic(50'000, 0.004, 9).fraud_count(), 200u);
    EXPECT_EQ(generate_synthetic(15, 0.1, 2).fraud_count(), 2u);
}

TEST(Synthetic, DeterministicPerSeed)
{
    const auto a = generate_synthetic(3000, 0.01, 42);
    const auto b = generate_synthetic(3000, 0.01, 42);
    const auto c = generate_synthetic(3000, 0.01, 43);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
    std::stringstream sa, sb;
    write_dataset(sa, a.records());
    write_dataset(sb, b.records());
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Synthetic, ParameterErrors)
{
    EXPECT_THROW(generate_synthetic(9, 0.5, 1), ParameterError);
    EXPECT_THROW(generate_synthetic(100, 0.0, 1), ParameterError);
    EXPECT_THROW(generate_synthetic(100, 1.0, 1), ParameterError);
    EXPECT_THROW(generate_synthetic(100, 0.001, 1), ParameterError);
}

TEST(Synthetic, AmountsAreCentsAndNonNegative)
{
    const auto d = generate_synthetic(5000, 0.01, 8);
    std::vector<double> amounts;
    for (const auto& t : d) {
        EXPECT_GE(t.amount, 0.0);
        EXPECT_NEAR(t.amount * 100.0, std::round(t.amount * 100.0), 1e-6);
        amounts.push_back(t.amount);
    }
    std::nth_element(amounts.begin(), amounts.begin() + amounts.size() / 2, amounts.end());
    const double median = amounts[amounts.size() / 2];
    EXPECT_GT(median, 12.0);
    EXPECT_LT(median, 32.0);
}

TEST(Synthetic, ClassesArePartiallySeparable)
{
    // held-out accuracy of a baseline logistic model on a balanced set
    const auto d = generate_synthetic(1000, 0.5, 7);
    const auto part = partition(d, 0.5, 1);
    const auto model = train(ClassifierSpec{ModelKind::LOG, Penalty::l2, 1.0}, part.sample_pool.records());
    std::size_t correct = 0;
    for (const auto& t : part.test_pool)
        correct += predict(model, t).label == t.label ? 1 : 0;
    EXPECT_GT(static_cast<double>(correct) / static_cast<double>(part.test_pool.size()), 0.5);
}

TEST(Partition, SizesFollowRoundedFraction)
{
    const auto d = testsupport::labelled({0, 1, 0, 0, 1, 0, 0, 1, 0, 1});
    const auto p = partition(d, 0.5, 3);
    EXPECT_EQ(p.sample_pool.size(), 5u);
    EXPECT_EQ(p.test_pool.size(), 5u);
    std::set<std::size_t> idx(p.sample_indices.begin(), p.sample_indices.end());
    EXPECT_EQ(idx.size(), 5u);
}

TEST(Partition, UnionEqualsInputAsMultiset)
{
    const auto d = generate_synthetic(4000, 0.02, 11);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto p = partition(d, 0.2, seed);
        EXPECT_EQ(p.sample_pool.size(), 800u);
        EXPECT_EQ(p.sample_pool.size() + p.test_pool.size(), d.size());
        std::map<std::pair<double, double>, int> count;
        for (const auto& t : d)
            ++count[{t.features[0], t.amount}];
        for (const auto& t : p.sample_pool)
            --count[{t.features[0], t.amount}];
        for (const auto& t : p.test_pool)
            --count[{t.features[0], t.amount}];
        for (const auto& [k, c] : count)
            EXPECT_EQ(c, 0);
        EXPECT_TRUE(std::is_sorted(p.sample_indices.begin(), p.sample_indices.end()));
        for (std::size_t i = 0; i < p.sample_indices.size(); ++i)
            EXPECT_EQ(p.sample_pool[i], d[p.sample_indices[i]]);
    }
}

TEST(Partition, DeterministicPerSeed)
{
    const auto d = generate_synthetic(3000, 0.02, 4);
    EXPECT_EQ(partition(d, 0.2, 9).sample_indices, partition(d, 0.2, 9).sample_indices);
    EXPECT_NE(partition(d, 0.2, 9).sample_indices, partition(d, 0.2, 10).sample_indices);
}

TEST(Partition, ZeroFraudPoolIsDegenerate)
{
    const auto d = testsupport::labelled({1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    EXPECT_THROW(partition(d, 0.5, 1), DegeneratePartitionError);
    EXPECT_THROW(partition(d, 0.0, 1), ParameterError);
    EXPECT_THROW(partition(d, 1.0, 1), ParameterError);
}

TEST(Random, DerivedSeedsAreDistinctAndStable)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100; ++i)
        for (std::uint64_t a = 0; a < 6; ++a)
            seen.insert(derive_seed(77, {i, a}));
    EXPECT_EQ(seen.size(), 600u);
    EXPECT_EQ(derive_seed(77, {3, 1}), derive_seed(77, {3, 1}));
    EXPECT_NE(derive_seed(77, {3, 1}), derive_seed(77, {1, 3}));
    EXPECT_NE(derive_seed(77, {}), derive_seed(78, {}));
}

TEST(Random, DrawWithoutReplacementIsSortedAndDistinct)
{
    Rng rng(5);
    const auto idx = draw_without_replacement(100, 30, rng);
    ASSERT_EQ(idx.size(), 30u);
    EXPECT_TRUE(std::adjacent_find(idx.begin(), idx.end(), std::greater_equal<>()) == idx.end());
    EXPECT_LT(idx.back(), 100u);
}
