#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "amds/core.hpp"
#include "amds/models.hpp"
#include "amds/weights.hpp"

namespace amds {

enum class AttackKind {
    fgsm,
    pgd_linf,
    pgd_l2,
    cw_l2,
    spsa,
    injection,
    morphing,
    adaptive_baseline,
    adaptive_improved,
};

std::string attack_name(AttackKind k);
AttackKind attack_from_name(const std::string& name);
AttackCategory attack_category(AttackKind k);
bool attack_is_gradient_based(AttackKind k);

struct AttackSpec {
    AttackKind kind = AttackKind::fgsm;
    double epsilon = 0.02;
    int steps = 20;            // pgd iterations; spsa ascent steps (1 = single estimate)
    double step_size = 0.005;  // pgd alpha; spsa step (<=0 selects epsilon/10)
    int queries = 100;         // spsa query budget
    double delta = 0.01;       // spsa perturbation radius
    double scale = 0.05;       // injection / morphing sigma multiplier
    int binary_search_iters = 20;  // cw
    double kappa = 0.0;            // cw margin
    std::uint64_t seed = 0;

    void validate() const;
};

struct AttackBatch {
    Matrix adv_features;
    std::vector<std::size_t> origin_indices;
    std::vector<int> labels;  // true labels of the origins
    AttackKind kind = AttackKind::fgsm;
    double asr = 0.0;
};

/// Black-box probability query (the SPSA contract).
using QueryFn = std::function<std::vector<double>(std::span<const double>)>;

std::vector<double> fgsm(const Model& surrogate, std::span<const double> x, int y,
                         double epsilon);

enum class PgdNorm { linf, l2 };
std::vector<double> pgd(const Model& surrogate, std::span<const double> x, int y,
                        double epsilon, int steps, double step_size, PgdNorm norm);

std::vector<double> cw_l2(const Model& surrogate, std::span<const double> x, int y,
                          int binary_search_iters = 20, double kappa = 0.0);

std::vector<double> spsa(const QueryFn& query, std::span<const double> x, int y,
                         int queries, double delta, double epsilon, double step_size,
                         int steps, std::uint64_t seed);

std::vector<double> injection(std::span<const double> x,
                              std::span<const double> feature_sigma, double scale,
                              std::mt19937_64& rng);

std::vector<double> morphing(std::span<const double> x,
                             std::span<const double> feature_sigma, double scale);

/// White-box view of the full system used by the adaptive adversaries.
struct SystemOracle {
    std::function<double(std::span<const double>)> ads_refined;
    std::function<int(std::span<const double>)> predict_class;
};

enum class AdaptiveVariant { baseline, improved };

struct AdaptiveResult {
    std::vector<double> x_adv;
    double ads_reduction = 0.0;  // fraction of the starting ADS shaved off
    bool success = false;        // misclassified at return
};

AdaptiveResult adaptive_attack(const SystemOracle& oracle, const Model& surrogate,
                               std::span<const double> x, int y, AdaptiveVariant variant,
                               double epsilon, int iters, std::uint64_t seed);

/// Fraction of originally-correct samples (standard ensemble vote) that the
/// adversarial batch flips.
double validate_asr(std::span<const std::unique_ptr<Model>> models, const Matrix& clean,
                    const std::vector<int>& labels, const Matrix& adv);

/// Applies one non-adaptive attack spec to a clean batch.
AttackBatch generate_batch(const AttackSpec& spec, const Model& surrogate,
                           const QueryFn& ensemble_query, const Matrix& clean,
                           const std::vector<int>& labels,
                           std::span<const double> feature_sigma);

}  // namespace amds
