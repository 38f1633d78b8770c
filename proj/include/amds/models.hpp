#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "amds/core.hpp"
#include "amds/dataset.hpp"

namespace amds {

enum class Paradigm {
    decision_tree,
    random_forest,
    boosted_trees_a,   // depth-wise growth
    boosted_trees_b,   // leaf-wise growth
    logistic_regression,
    mlp,
};

std::string paradigm_name(Paradigm p);
Paradigm paradigm_from_name(const std::string& name);

/// Fixed hyperparameters per paradigm: decision tree depth 10, random forest
/// 100 trees, both boosted variants 100 rounds at lr 0.1, logistic L2 C=1.0,
/// MLP hidden 100 then 50 with ReLU.
struct ClassifierSpec {
    Paradigm paradigm = Paradigm::decision_tree;
    std::uint64_t seed = 0;
};

/// The standard six-paradigm ensemble, in canonical slot order.
std::vector<ClassifierSpec> standard_ensemble_specs(std::uint64_t master_seed);

class Model {
public:
    virtual ~Model() = default;

    virtual Paradigm paradigm() const = 0;
    virtual std::size_t feature_count() const = 0;
    virtual std::size_t class_count() const = 0;

    /// Probability vector over classes; deterministic; throws on width mismatch.
    virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;

    virtual bool differentiable() const { return false; }
    virtual std::vector<double> logits(std::span<const double> x) const;
    /// Gradient of cross-entropy loss w.r.t. x at label = target_class.
    virtual std::vector<double> input_gradient(std::span<const double> x,
                                               int target_class) const;
    /// Gradient of coeffs . logits(x) w.r.t. x (margin losses, C&W).
    virtual std::vector<double> logit_combination_gradient(std::span<const double> x,
                                                           std::span<const double> coeffs) const;

    virtual std::string to_json_string() const = 0;

    int predict_class(std::span<const double> x) const {
        auto p = predict_proba(x);
        return static_cast<int>(argmax_lowest(p));
    }
    void check_width(std::span<const double> x) const {
        if (x.size() != feature_count())
            throw DataError("model expects " + std::to_string(feature_count()) +
                            " features, got " + std::to_string(x.size()));
    }
};

std::unique_ptr<Model> fit(const ClassifierSpec& spec, const LabeledDataset& train);
std::unique_ptr<Model> model_from_json_string(const std::string& text);

/// Per-sample ensemble output: uniform-vote prediction plus the
/// disagreement signal wired in from the signals module.
struct EnsembleOutput {
    Matrix prob_matrix;            // 6 x C, row i = p_i
    std::vector<int> votes;        // argmax per row, ties -> lowest index
    std::vector<double> ens_prob;  // column mean
    int ens_vote = 0;              // plurality; ties -> ens_prob -> lowest index
    double disagreement = 0.0;
};

EnsembleOutput ensemble_forward(std::span<const std::unique_ptr<Model>> models,
                                std::span<const double> x);

/// argmax_c sum_i v_i p_i^(c); v must be on the simplex within 1e-9.
int weighted_vote(const Matrix& prob_matrix, std::span<const double> model_weights);

/// Validation accuracy of one model.
double model_accuracy(const Model& model, const LabeledDataset& data);

}  // namespace amds
