// Trains one tuned LOG model on a synthetic undersample and prints its
// confusion counts, F1 and fraud cost next to an always-clean baseline.

#include <iomanip>
#include <iostream>
#include <vector>

#include "fraudbench/fraudbench.hpp"

int main()
{
    namespace fb = fraudbench;

    const fb::Dataset data = fb::generate_synthetic(20'000, 0.004, 7);
    const fb::Partition part = fb::partition(data, 0.2, 11);

    fb::SampleSpec spec{fb::SampleMethod::undersample, 0, 0.3};
    spec.seed = 13;
    const fb::Sample sample = fb::build_sample(part.sample_pool, spec);

    fb::ClassifierSpec log_spec{fb::ModelKind::LOG, fb::Penalty::l1, 0.5};
    const fb::TrainedModel model = fb::train(log_spec, sample);

    std::vector<fb::Transaction> eval(part.test_pool.begin(), part.test_pool.end());
    eval.insert(eval.end(), sample.leftover.begin(), sample.leftover.end());
    const auto truth = fb::labels_of(eval);

    std::vector<fb::Label> predicted, baseline(eval.size(), fb::Label::clean);
    for (const auto& t : eval)
        predicted.push_back(fb::predict(model, t).label);

    const auto cm = fb::default_cost_model();
    const auto counts = fb::confusion(predicted, truth);
    const auto metrics = fb::derive_metrics(counts);

    std::cout << std::fixed << std::setprecision(2);
    std::cout << "sample: " << sample.size() << " records, fraud ratio " << sample.achieved_ratio << '\n';
    std::cout << "evaluation: " << eval.size() << " records\n";
    std::cout << "TP " << counts.tp << "  FP " << counts.fp << "  TN " << counts.tn << "  FN " << counts.fn << '\n';
    if (metrics.f1)
        std::cout << "F1 " << 100.0 * *metrics.f1 << "%\n";
    std::cout << "fraud cost, " << log_spec.label() << ": " << fb::fraud_cost(predicted, eval, cm).units() << '\n';
    std::cout << "fraud cost, never flag: " << fb::fraud_cost(baseline, eval, cm).units() << '\n';
}
