#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "amds/attacks.hpp"
#include "amds/core.hpp"
#include "amds/pipeline.hpp"
#include "json.hpp"

namespace amds {

double accuracy(std::span<const int> preds, std::span<const int> labels);
/// Unweighted mean of per-class F1 with 0/0 := 0; classes absent from both
/// preds and labels are skipped.
double f1_macro(std::span<const int> preds, std::span<const int> labels, int class_count);

struct CI {
    double lo = 0.0;
    double point = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap over resampled index sets.
CI bootstrap_ci(const std::function<double(const std::vector<std::size_t>&)>& metric,
                std::size_t n, int iters = 1000, double level = 0.95,
                std::uint64_t seed = 0);

/// Held-out evaluation material: clean test rows plus one adversarial batch
/// per configured attack, generated from test samples of all classes.
struct EvalSuite {
    Matrix clean;
    std::vector<int> clean_labels;
    Matrix attack_origin;  // shared clean origin pool of every batch
    std::vector<int> attack_origin_labels;
    std::vector<AttackBatch> batches;
};

EvalSuite build_eval_suite(const SystemManifest& manifest, const LabeledDataset& test_std,
                           std::size_t clean_count, std::size_t per_attack,
                           std::uint64_t seed);

nlohmann::json table1_weights(const SystemManifest& manifest);
/// Generic vs attack-specific vs two-stage detection AUC per attack.
/// Validation data is needed to learn specific weights for attacks that the
/// ASR gate excluded from the deployed bank.
nlohmann::json table2_twostage(const SystemManifest& manifest,
                               const LabeledDataset& val_std, const EvalSuite& suite);
nlohmann::json table3_cascade(const SystemManifest& manifest, const EvalSuite& suite);
nlohmann::json table4_baselines(const SystemManifest& manifest,
                                const LabeledDataset& train_std,
                                const LabeledDataset& val_std, const EvalSuite& suite,
                                double at_epsilon, int at_steps, int bootstrap_iters,
                                std::uint64_t seed);
nlohmann::json table5_ablation(const SystemManifest& manifest, const EvalSuite& suite);
nlohmann::json table6_scaling(const std::vector<int>& dims, double epsilon,
                              std::uint64_t seed);
nlohmann::json table7_adaptive(const SystemManifest& manifest, const EvalSuite& suite,
                               double epsilon, int samples, std::uint64_t seed);

/// Category-inference precision/recall/F1 against the known generated
/// categories of the suite's batches.
nlohmann::json category_inference_report(const SystemManifest& manifest,
                                         const EvalSuite& suite);

std::string render_report_text(
    const std::vector<std::pair<std::string, nlohmann::json>>& tables);

void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace amds
