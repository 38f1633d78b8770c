#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amds/attacks.hpp"
#include "amds/dataset.hpp"
#include "amds/eval.hpp"
#include "amds/pipeline.hpp"

namespace amds {

struct DatasetConfig {
    bool synth = true;
    std::uint64_t seed = 0;  // 0 = follow the master seed

    int classes = 7;
    int dims = 20;
    int per_class = 1100;
    double separation = 6.0;
    std::string csv_path;
    std::string label_column;
};

struct EvalConfig {
    std::size_t clean_samples = 1200;
    std::size_t attack_samples = 300;
    int bootstrap_iters = 1000;
    bool baselines = true;
    bool ablations = true;
    bool adaptive = true;
    bool scaling = false;
    int adaptive_samples = 120;
    double adaptive_epsilon = 0.0;  // 0 = use the configured fgsm epsilon
    double at_epsilon = 0.0;        // 0 = use the configured fgsm epsilon
    int at_steps = 10;
    std::vector<int> scaling_dims = {20, 77, 190};
    double scaling_epsilon = 0.02;
};

/// Experiment configuration. Parsing is strict: unknown keys anywhere are
/// rejected before any computation starts.
struct RunConfig {
    std::uint64_t seed = 42;
    std::string output_dir = "runs/out";
    int jobs = 2;
    DatasetConfig dataset;
    SplitSpec split{0.72, 0.14, 0.14, 0};
    double model_gate = 0.95;
    double asr_gate = 0.50;
    std::vector<AttackSpec> attacks;
    int weight_attack_samples = 300;
    bool exclude_below_gate = true;
    double target_fpr = 0.10;
    bool tune_tau_anomaly = false;
    EvalConfig eval;

    TrainOptions train_options() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_json(const std::string& text);

struct PreparedData {
    LabeledDataset train_std;
    LabeledDataset val_std;
    LabeledDataset test_std;
    Scaler scaler;
};

/// Deterministic dataset construction + split + standardization from config.
PreparedData prepare_data(const RunConfig& config);

/// Feature-only CSV reader for the infer command; columns are matched to the
/// scaler schema by name, an optional label column is dropped.
Matrix load_feature_csv(const std::string& path, const std::vector<std::string>& schema,
                        const std::string& drop_column = "");

void save_suite(const EvalSuite& suite, const std::string& dir,
                const std::vector<std::string>& schema,
                const std::vector<AttackRecord>& attack_records = {});
EvalSuite load_suite(const std::string& dir, const SystemManifest& manifest);

}  // namespace amds
