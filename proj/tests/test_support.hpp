#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "fraudbench/core.hpp"
#include "fraudbench/random.hpp"

namespace testsupport {

/// Records with the given 0/1 labels; feature 0 holds the position.
inline fraudbench::Dataset labelled(std::initializer_list<int> classes)
{
    std::vector<fraudbench::Transaction> v;
    double i = 0.0;
    for (int c : classes) {
        fraudbench::Transaction t;
        t.features[0] = i;
        t.amount = 1.0 + i;
        t.label = c ? fraudbench::Label::fraud : fraudbench::Label::clean;
        v.push_back(t);
        i += 1.0;
    }
    return fraudbench::Dataset(std::move(v));
}

/// Pool with exactly `fraud` fraud and `clean` clean records, Gaussian features.
inline fraudbench::Dataset pool(std::size_t fraud, std::size_t clean, std::uint64_t seed)
{
    fraudbench::Rng rng(seed);
    std::vector<fraudbench::Transaction> v;
    for (std::size_t i = 0; i < fraud + clean; ++i) {
        fraudbench::Transaction t;
        t.label = i < fraud ? fraudbench::Label::fraud : fraudbench::Label::clean;
        for (auto& f : t.features)
            f = rng.normal(i < fraud ? 1.5 : 0.0, 1.0);
        t.amount = std::round(std::exp(rng.normal(3.0, 1.0)) * 100.0) / 100.0;
        t.time = static_cast<double>(i);
        v.push_back(t);
    }
    return fraudbench::Dataset(std::move(v));
}

}  // namespace testsupport
