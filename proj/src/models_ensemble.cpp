#include <cmath>

#include "amds/models.hpp"
#include "amds/rng.hpp"
#include "amds/signals.hpp"
#include "json.hpp"

namespace amds {

using nlohmann::json;

std::string paradigm_name(Paradigm p) {
    switch (p) {
        case Paradigm::decision_tree: return "decision_tree";
        case Paradigm::random_forest: return "random_forest";
        case Paradigm::boosted_trees_a: return "boosted_trees_a";
        case Paradigm::boosted_trees_b: return "boosted_trees_b";
        case Paradigm::logistic_regression: return "logistic_regression";
        case Paradigm::mlp: return "mlp";
    }
    throw ConfigError("unknown paradigm");
}

Paradigm paradigm_from_name(const std::string& name) {
    if (name == "decision_tree") return Paradigm::decision_tree;
    if (name == "random_forest") return Paradigm::random_forest;
    if (name == "boosted_trees_a") return Paradigm::boosted_trees_a;
    if (name == "boosted_trees_b") return Paradigm::boosted_trees_b;
    if (name == "logistic_regression") return Paradigm::logistic_regression;
    if (name == "mlp") return Paradigm::mlp;
    throw ConfigError("unknown paradigm: " + name);
}

std::vector<ClassifierSpec> standard_ensemble_specs(std::uint64_t master_seed) {
    std::vector<Paradigm> order = {Paradigm::decision_tree,       Paradigm::random_forest,
                                   Paradigm::boosted_trees_a,     Paradigm::boosted_trees_b,
                                   Paradigm::logistic_regression, Paradigm::mlp};
    std::vector<ClassifierSpec> specs;
    for (std::size_t i = 0; i < order.size(); ++i)
        specs.push_back({order[i], component_seed(master_seed, "model", i)});
    return specs;
}

std::vector<double> Model::logits(std::span<const double>) const {
    throw DataError("non-differentiable model: '" + paradigm_name(paradigm()) +
                    "' exposes no logits");
}

std::vector<double> Model::input_gradient(std::span<const double>, int) const {
    throw DataError("non-differentiable model: input_gradient unavailable for '" +
                    paradigm_name(paradigm()) + "'; use the MLP surrogate");
}

std::vector<double> Model::logit_combination_gradient(std::span<const double>,
                                                      std::span<const double>) const {
    throw DataError("non-differentiable model: gradient unavailable for '" +
                    paradigm_name(paradigm()) + "'");
}

// Factories implemented per paradigm translation unit.
std::unique_ptr<Model> make_decision_tree(const ClassifierSpec&, const LabeledDataset&);
std::unique_ptr<Model> make_random_forest(const ClassifierSpec&, const LabeledDataset&);
std::unique_ptr<Model> make_boosted(const ClassifierSpec&, const LabeledDataset&, bool);
std::unique_ptr<Model> make_logistic(const ClassifierSpec&, const LabeledDataset&);
std::unique_ptr<Model> make_mlp(const ClassifierSpec&, const LabeledDataset&);
std::unique_ptr<Model> tree_model_from_json(const json&);
std::unique_ptr<Model> logistic_from_json(const json&);
std::unique_ptr<Model> mlp_from_json(const json&);

std::unique_ptr<Model> fit(const ClassifierSpec& spec, const LabeledDataset& train) {
    switch (spec.paradigm) {
        case Paradigm::decision_tree: return make_decision_tree(spec, train);
        case Paradigm::random_forest: return make_random_forest(spec, train);
        case Paradigm::boosted_trees_a: return make_boosted(spec, train, false);
        case Paradigm::boosted_trees_b: return make_boosted(spec, train, true);
        case Paradigm::logistic_regression: return make_logistic(spec, train);
        case Paradigm::mlp: return make_mlp(spec, train);
    }
    throw ConfigError("unknown paradigm");
}

std::unique_ptr<Model> model_from_json_string(const std::string& text) {
    auto j = json::parse(text);
    std::string p = j.at("paradigm");
    if (p == "logistic_regression") return logistic_from_json(j);
    if (p == "mlp") return mlp_from_json(j);
    return tree_model_from_json(j);
}

EnsembleOutput ensemble_forward(std::span<const std::unique_ptr<Model>> models,
                                std::span<const double> x) {
    if (models.size() != 6) throw DataError("ensemble_forward: expected 6 models");
    const auto C = models[0]->class_count();
    EnsembleOutput out;
    out.prob_matrix = Matrix(6, C);
    out.votes.resize(6);
    for (std::size_t i = 0; i < 6; ++i) {
        auto p = models[i]->predict_proba(x);
        std::copy(p.begin(), p.end(), out.prob_matrix.row(i).begin());
        out.votes[i] = static_cast<int>(argmax_lowest(p));
    }
    out.ens_prob.assign(C, 0.0);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t c = 0; c < C; ++c) out.ens_prob[c] += out.prob_matrix.at(i, c) / 6.0;

    // Plurality vote; ties broken by highest ensemble probability among the
    // tied classes, then lowest class index.
    std::vector<int> counts(C, 0);
    for (int v : out.votes) counts[v]++;
    int best_count = 0;
    for (std::size_t c = 0; c < C; ++c) best_count = std::max(best_count, counts[c]);
    int winner = -1;
    for (std::size_t c = 0; c < C; ++c) {
        if (counts[c] != best_count) continue;
        if (winner < 0 || out.ens_prob[c] > out.ens_prob[winner]) winner = static_cast<int>(c);
    }
    out.ens_vote = winner;
    out.disagreement = disagreement(out.prob_matrix);
    return out;
}

int weighted_vote(const Matrix& prob_matrix, std::span<const double> model_weights) {
    if (model_weights.size() != prob_matrix.rows())
        throw DataError("weighted_vote: weight count mismatch");
    double sum = 0.0;
    for (double v : model_weights) {
        if (v < -1e-9) throw DataError("weighted_vote: negative model weight");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("weighted_vote: weights off the simplex (sum=" + std::to_string(sum) +
                        ")");
    std::vector<double> score(prob_matrix.cols(), 0.0);
    for (std::size_t i = 0; i < prob_matrix.rows(); ++i)
        for (std::size_t c = 0; c < prob_matrix.cols(); ++c)
            score[c] += model_weights[i] * prob_matrix.at(i, c);
    return static_cast<int>(argmax_lowest(score));
}

double model_accuracy(const Model& model, const LabeledDataset& data) {
    if (data.size() == 0) throw DataError("model_accuracy: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (model.predict_class(data.features.row(i)) == data.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace amds
