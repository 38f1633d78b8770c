#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "amds/core.hpp"
#include "amds/signals.hpp"

namespace amds {

/// (alpha, beta, gamma) on the 2-simplex: entropy, disagreement, anomaly.
struct SignalWeights {
    double alpha = 1.0 / 3.0;
    double beta = 1.0 / 3.0;
    double gamma = 1.0 / 3.0;

    void check() const;
};

enum class AttackCategory { gradient, distribution };
std::string category_name(AttackCategory c);

/// Learned weights at the three granularities plus their training AUCs.
struct WeightBank {
    SignalWeights generic;
    double generic_auc = 0.5;
    std::map<std::string, SignalWeights> per_attack;
    std::map<std::string, double> per_attack_auc;
    // Attacks below the ASR gate: weights are still learned for reporting
    // (near-random by construction) but stay out of the bank and of the
    // category averages.
    std::map<std::string, SignalWeights> excluded_per_attack;
    std::map<std::string, double> excluded_per_attack_auc;
    SignalWeights gradient_cat;
    SignalWeights distribution_cat;
    // Directly learned pooled-category weights; only used by the
    // no-attack-specific-weights ablation.
    SignalWeights gradient_cat_direct;
    SignalWeights distribution_cat_direct;

    const SignalWeights& category(AttackCategory c) const {
        return c == AttackCategory::gradient ? gradient_cat : distribution_cat;
    }
};

/// Per-category ensemble model weights (cubic accuracy sharpening).
struct ModelWeightBank {
    std::vector<double> gradient = std::vector<double>(6, 1.0 / 6.0);
    std::vector<double> distribution = std::vector<double>(6, 1.0 / 6.0);
    std::vector<double> uniform = std::vector<double>(6, 1.0 / 6.0);

    const std::vector<double>& category(AttackCategory c) const {
        return c == AttackCategory::gradient ? gradient : distribution;
    }
};

/// ADS(x; w) = alpha H^ + beta D^ + gamma A^ over normalized signals.
double ads(const SignalVector& normalized, const SignalWeights& w);

/// Mann-Whitney AUC via average ranks; equals brute-force pair counting
/// with ties worth one half.
double auc(std::span<const double> clean_scores, std::span<const double> adv_scores);

struct LearnedWeights {
    SignalWeights weights;
    double auc = 0.5;
    bool degenerate = false;
};

/// Maximizes AUC over the 2-simplex: exhaustive 0.01 grid then local 0.001
/// refinement. Ties keep the first candidate in lexicographic (alpha, beta)
/// enumeration order.
LearnedWeights learn_weights(const std::vector<SignalVector>& clean,
                             const std::vector<SignalVector>& adv);

SignalWeights category_average(const std::vector<SignalWeights>& members);

/// Cubic accuracy sharpening: v_i = Acc_i^3 / sum_j Acc_j^3.
std::vector<double> model_category_weights(std::span<const double> accuracies);

/// conf >= 0.75 keeps the category weights; below that, 50/50 blend with
/// uniform.
std::vector<double> blend(std::span<const double> v_category, double conf);

/// min(1, |A^ - tau_anomaly| / 0.12).
double category_confidence(double anomaly_n, double tau_anomaly = 0.50);

}  // namespace amds
