#pragma once

// The five fraud detection systems behind one train/predict surface.
//
//   LOG  logistic regression, L1/L2, standardized features
//   SVC  linear SVC (squared hinge), L1/L2, standardized features
//   RF   random forest, raw features
//   GNB  Gaussian naive Bayes, raw features
//   KNN  k-nearest neighbours, standardized features (control model)
//
// Every score lies in [0, 1] and the label is fraud iff score >= 0.5.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fraudbench/features.hpp"
#include "fraudbench/forest.hpp"
#include "fraudbench/knn.hpp"
#include "fraudbench/linear.hpp"
#include "fraudbench/naive_bayes.hpp"
#include "fraudbench/sampling.hpp"

namespace fraudbench {

enum class ModelKind { LOG, SVC, RF, GNB, KNN };

inline constexpr double kDecisionThreshold = 0.5;

inline std::string to_string(ModelKind k)
{
    switch (k) {
    case ModelKind::LOG: return "LOG";
    case ModelKind::SVC: return "SVC";
    case ModelKind::RF: return "RF";
    case ModelKind::GNB: return "GNB";
    case ModelKind::KNN: return "KNN";
    }
    return "?";
}

inline ModelKind model_kind_from_string(std::string s)
{
    for (auto& ch : s)
        ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (s == "LOG") return ModelKind::LOG;
    if (s == "SVC") return ModelKind::SVC;
    if (s == "RF") return ModelKind::RF;
    if (s == "GNB") return ModelKind::GNB;
    if (s == "KNN") return ModelKind::KNN;
    throw ParameterError("unknown model kind: " + s);
}

inline std::string to_string(Penalty p) { return p == Penalty::l1 ? "l1" : "l2"; }

inline Penalty penalty_from_string(const std::string& s)
{
    if (s == "l1" || s == "L1") return Penalty::l1;
    if (s == "l2" || s == "L2") return Penalty::l2;
    throw ParameterError("unknown penalty: " + s);
}

struct ClassifierSpec {
    ModelKind kind = ModelKind::LOG;
    Penalty penalty = Penalty::l2;  // LOG/SVC
    double c_value = 1.0;           // LOG/SVC, inverse regularization strength
    std::size_t trees = 10;         // RF
    std::size_t k = 5;              // KNN
    std::uint64_t seed = 0;

    bool uses_penalty() const noexcept { return kind == ModelKind::LOG || kind == ModelKind::SVC; }

    /// Hyperparameters only; seeds excluded.
    bool same_design(const ClassifierSpec& o) const noexcept
    {
        if (kind != o.kind)
            return false;
        switch (kind) {
        case ModelKind::LOG:
        case ModelKind::SVC: return penalty == o.penalty && c_value == o.c_value;
        case ModelKind::RF: return trees == o.trees;
        case ModelKind::KNN: return k == o.k;
        case ModelKind::GNB: return true;
        }
        return false;
    }

    /// "LOG(l1,0.5)", "RF(80)", "KNN(10)", "GNB".
    std::string label() const
    {
        std::ostringstream os;
        os << to_string(kind);
        switch (kind) {
        case ModelKind::LOG:
        case ModelKind::SVC: os << '(' << to_string(penalty) << ',' << detail::format_exact(c_value) << ')'; break;
        case ModelKind::RF: os << '(' << trees << ')'; break;
        case ModelKind::KNN: os << '(' << k << ')'; break;
        case ModelKind::GNB: break;
        }
        return os.str();
    }
};

inline void validate(const ClassifierSpec& s)
{
    if (s.uses_penalty() && !(s.c_value > 0.0 && std::isfinite(s.c_value)))
        throw ParameterError("c_value must be positive");
    if (s.kind == ModelKind::RF && s.trees == 0)
        throw ParameterError("RF needs at least one tree");
    if (s.kind == ModelKind::KNN && s.k == 0)
        throw ParameterError("KNN needs k >= 1");
}

struct Prediction {
    double score = 0.0;
    Label label = Label::clean;
};

inline Prediction make_prediction(double score)
{
    return {score, score >= kDecisionThreshold ? Label::fraud : Label::clean};
}

struct TrainedModel {
    ClassifierSpec spec;
    std::size_t feature_dim = 0;
    std::variant<LinearModel, GaussianNB, RandomForest, KNearest> params;
    std::optional<std::string> warning;  // e.g. solver hit its iteration cap
};

inline TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& x, std::span<const Label> y,
                          const SolverOptions& solver = {})
{
    validate(spec);
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw InputError("train: feature rows and labels differ in length");
    if (x.rows() == 0)
        throw TrainingError("train: empty sample");
    if (!x.allFinite())
        throw InputError("train: non-finite feature value");
    const auto n_fraud = static_cast<std::size_t>(std::count(y.begin(), y.end(), Label::fraud));
    if (n_fraud == 0 || n_fraud == y.size())
        throw TrainingError("train: sample contains a single class");

    TrainedModel m{spec, static_cast<std::size_t>(x.cols()), GaussianNB{}, std::nullopt};
    switch (spec.kind) {
    case ModelKind::LOG:
    case ModelKind::SVC: {
        const auto loss = spec.kind == ModelKind::LOG ? LinearLoss::logistic : LinearLoss::squared_hinge;
        auto lm = fit_linear(x, y, loss, spec.penalty, spec.c_value, solver);
        if (!lm.converged)
            m.warning = "solver did not converge within " + std::to_string(solver.max_iterations) +
                        " iterations; best iterate returned";
        m.params = std::move(lm);
        break;
    }
    case ModelKind::RF: m.params = RandomForest::fit(x, y, spec.trees, spec.seed); break;
    case ModelKind::GNB: m.params = GaussianNB::fit(x, y); break;
    case ModelKind::KNN:
        if (spec.k > y.size())
            throw TrainingError("KNN: k=" + std::to_string(spec.k) + " exceeds sample size " + std::to_string(y.size()));
        m.params = KNearest::fit(x, y, spec.k);
        break;
    }
    return m;
}

inline TrainedModel train(const ClassifierSpec& spec, std::span<const Transaction> records,
                          const SolverOptions& solver = {})
{
    const auto y = labels_of(records);
    return train(spec, feature_matrix(records), y, solver);
}

inline TrainedModel train(const ClassifierSpec& spec, const Sample& sample, const SolverOptions& solver = {})
{
    return train(spec, std::span<const Transaction>(sample.records), solver);
}

inline Prediction predict(const TrainedModel& model, std::span<const double> row)
{
    if (row.size() != model.feature_dim)
        throw InputError("predict: expected " + std::to_string(model.feature_dim) + " features, got " +
                         std::to_string(row.size()));
    require_finite(row);
    const double s = std::visit([&](const auto& p) { return p.score(row); }, model.params);
    return make_prediction(s);
}

inline Prediction predict(const TrainedModel& model, const Transaction& t)
{
    std::array<double, kModelFeatureCount> row{};
    fill_features(t, row);
    return predict(model, std::span<const double>(row));
}

inline std::vector<Prediction> predict_batch(const TrainedModel& model, std::span<const Transaction> records)
{
    std::vector<Prediction> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            out.push_back(predict(model, records[i]));
        } catch (const InputError& e) {
            throw InputError("record " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd json_vec(const nlohmann::json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json standardizer_json(const Standardizer& s)
{
    return {{"mean", vec_json(s.mean)}, {"scale", vec_json(s.scale)}};
}

inline Standardizer json_standardizer(const nlohmann::json& j)
{
    return {json_vec(j.at("mean")), json_vec(j.at("scale"))};
}

inline std::vector<int> labels_json(std::span<const Label> y)
{
    std::vector<int> out;
    for (auto l : y)
        out.push_back(is_fraud(l) ? 1 : 0);
    return out;
}

}  // namespace detail

inline nlohmann::json to_json(const ClassifierSpec& s)
{
    nlohmann::json j{{"kind", to_string(s.kind)}, {"seed", s.seed}};
    if (s.uses_penalty()) {
        j["penalty"] = to_string(s.penalty);
        j["c"] = s.c_value;
    }
    if (s.kind == ModelKind::RF)
        j["trees"] = s.trees;
    if (s.kind == ModelKind::KNN)
        j["k"] = s.k;
    return j;
}

inline ClassifierSpec classifier_spec_from_json(const nlohmann::json& j)
{
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "kind" && it.key() != "penalty" && it.key() != "c" && it.key() != "trees" &&
            it.key() != "k" && it.key() != "seed")
            throw ParameterError("unknown classifier key: " + it.key());
    ClassifierSpec s;
    s.kind = model_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("penalty"))
        s.penalty = penalty_from_string(j["penalty"].get<std::string>());
    if (j.contains("c"))
        s.c_value = j["c"].get<double>();
    if (j.contains("trees"))
        s.trees = j["trees"].get<std::size_t>();
    if (j.contains("k"))
        s.k = j["k"].get<std::size_t>();
    if (j.contains("seed"))
        s.seed = j["seed"].get<std::uint64_t>();
    validate(s);
    return s;
}

/// Versioned document: {format_version, spec, feature_dim, warning?, params}.
inline nlohmann::json to_json(const TrainedModel& m)
{
    nlohmann::json params;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                params = {{"standardizer", detail::standardizer_json(p.standardizer)},
                          {"weights", detail::vec_json(p.weights)},
                          {"bias", p.bias},
                          {"iterations", p.iterations},
                          {"converged", p.converged}};
            } else if constexpr (std::is_same_v<T, GaussianNB>) {
                params = {{"mean", {detail::vec_json(p.mean.row(0).transpose()), detail::vec_json(p.mean.row(1).transpose())}},
                          {"var", {detail::vec_json(p.var.row(0).transpose()), detail::vec_json(p.var.row(1).transpose())}},
                          {"log_prior", p.log_prior},
                          {"epsilon", p.epsilon}};
            } else if constexpr (std::is_same_v<T, RandomForest>) {
                nlohmann::json trees = nlohmann::json::array();
                for (const auto& t : p.trees) {
                    nlohmann::json nodes = nlohmann::json::array();
                    for (const auto& n : t.nodes())
                        nodes.push_back({n.feature, n.threshold, n.left, n.right, is_fraud(n.label) ? 1 : 0});
                    trees.push_back(std::move(nodes));
                }
                params = {{"trees", std::move(trees)}};
            } else {
                std::vector<double> flat(p.points.data(), p.points.data() + p.points.size());
                params = {{"standardizer", detail::standardizer_json(p.standardizer)},
                          {"points", flat},
                          {"labels", detail::labels_json(p.labels)},
                          {"k", p.k}};
            }
        },
        m.params);
    nlohmann::json j{{"format_version", kModelFormatVersion},
                     {"spec", to_json(m.spec)},
                     {"feature_dim", m.feature_dim},
                     {"params", std::move(params)}};
    if (m.warning)
        j["warning"] = *m.warning;
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j)
{
    if (j.at("format_version").get<int>() != kModelFormatVersion)
        throw ParameterError("unsupported model format version");
    TrainedModel m;
    m.spec = classifier_spec_from_json(j.at("spec"));
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    if (j.contains("warning"))
        m.warning = j["warning"].get<std::string>();
    const auto& p = j.at("params");
    const auto d = static_cast<Eigen::Index>(m.feature_dim);
    switch (m.spec.kind) {
    case ModelKind::LOG:
    case ModelKind::SVC: {
        LinearModel lm;
        lm.loss = m.spec.kind == ModelKind::LOG ? LinearLoss::logistic : LinearLoss::squared_hinge;
        lm.standardizer = detail::json_standardizer(p.at("standardizer"));
        lm.weights = detail::json_vec(p.at("weights"));
        lm.bias = p.at("bias").get<double>();
        lm.iterations = p.at("iterations").get<int>();
        lm.converged = p.at("converged").get<bool>();
        m.params = std::move(lm);
        break;
    }
    case ModelKind::GNB: {
        GaussianNB g;
        g.mean.resize(2, d);
        g.var.resize(2, d);
        for (int c = 0; c < 2; ++c) {
            g.mean.row(c) = detail::json_vec(p.at("mean").at(static_cast<std::size_t>(c))).transpose();
            g.var.row(c) = detail::json_vec(p.at("var").at(static_cast<std::size_t>(c))).transpose();
        }
        g.log_prior = p.at("log_prior").get<std::array<double, 2>>();
        g.epsilon = p.at("epsilon").get<double>();
        m.params = std::move(g);
        break;
    }
    case ModelKind::RF: {
        RandomForest f;
        for (const auto& tj : p.at("trees")) {
            std::vector<DecisionTree::Node> nodes;
            for (const auto& nj : tj)
                nodes.push_back({nj.at(0).get<int>(), nj.at(1).get<double>(), nj.at(2).get<int>(),
                                 nj.at(3).get<int>(), nj.at(4).get<int>() ? Label::fraud : Label::clean});
            f.trees.emplace_back(std::move(nodes));
        }
        m.params = std::move(f);
        break;
    }
    case ModelKind::KNN: {
        KNearest kn;
        kn.standardizer = detail::json_standardizer(p.at("standardizer"));
        const auto flat = p.at("points").get<std::vector<double>>();
        const auto labels = p.at("labels").get<std::vector<int>>();
        kn.points = Eigen::Map<const FeatureMatrix>(flat.data(), static_cast<Eigen::Index>(labels.size()), d);
        for (int l : labels)
            kn.labels.push_back(l ? Label::fraud : Label::clean);
        kn.k = p.at("k").get<std::size_t>();
        m.params = std::move(kn);
        break;
    }
    }
    return m;
}

}  // namespace fraudbench
