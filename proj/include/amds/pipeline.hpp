#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "amds/attacks.hpp"
#include "amds/core.hpp"
#include "amds/dataset.hpp"
#include "amds/detector.hpp"
#include "amds/models.hpp"
#include "amds/signals.hpp"
#include "amds/weights.hpp"

namespace amds {

struct AttackRecord {
    AttackSpec spec;
    double asr = 0.0;
    bool included_in_weight_learning = true;
};

/// Everything inference needs; incomplete manifests refuse to load.
struct SystemManifest {
    int format_version = 1;
    std::uint64_t master_seed = 0;
    std::string dataset_fingerprint;
    std::vector<std::unique_ptr<Model>> models;  // six, canonical slot order
    std::vector<double> model_val_accuracy;
    Scaler scaler;
    BenignDistribution benign;
    SignalNormalizer normalizer;
    WeightBank weight_bank;
    ModelWeightBank model_weights;
    Thresholds thresholds;
    std::vector<AttackRecord> attacks;
    int weight_attack_samples = 300;
    int class_count = 0;
    std::size_t feature_count = 0;

    SystemManifest() = default;
    SystemManifest(SystemManifest&&) = default;
    SystemManifest& operator=(SystemManifest&&) = default;
};

struct TrainOptions {
    std::uint64_t master_seed = 42;
    std::vector<AttackSpec> attacks;
    double model_gate = 0.95;
    double asr_gate = 0.50;
    double target_fpr = 0.10;
    bool tune_tau_anomaly = false;
    bool exclude_below_gate_from_weights = true;
    int attack_sample_count = 300;  // per attack, drawn from validation
    int jobs = 2;
    bool verbose = true;
};

/// Alg.-style four-stage training: model fits with the >95% gate, attack
/// generation with the ASR>50% gate (weak attacks flagged, retained),
/// three-granularity weight learning, threshold tuning.
SystemManifest train(const TrainOptions& opts, const LabeledDataset& train_std,
                     const LabeledDataset& val_std, const Scaler& scaler);

struct DualOutput {
    int y_detect = 0;
    int y_class = 0;
    double confidence_detect = 0.0;  // min(1, ads_refined / tau_detect)
    double confidence_class = 0.0;   // max(ens_prob)
    AttackCategory inferred_category = AttackCategory::gradient;
    int cascade_stage = 1;
};

struct InferenceOptions {
    bool cascade = true;
    bool detection = true;           // off: y_class is always the ensemble vote
    bool adaptive_weighting = true;  // off: stage 3 falls back to the ensemble vote
    enum class DetectionWeights { two_stage, generic_only, direct_category };
    DetectionWeights weights = DetectionWeights::two_stage;
};

DualOutput infer(std::span<const double> x, const SystemManifest& manifest,
                 const InferenceOptions& opts = {}, CascadeCounters* counters = nullptr);

struct InferenceStats {
    CascadeCounters counters;
    double ms_per_sample = 0.0;
    double total_ms = 0.0;
};

std::pair<std::vector<DualOutput>, InferenceStats>
infer_batch(const Matrix& X, const SystemManifest& manifest,
            const InferenceOptions& opts = {});

/// Raw (unnormalized) signals for one standardized sample.
SignalVector raw_signals(const SystemManifest& manifest, std::span<const double> x);
/// Raw signals normalized by the manifest's frozen bounds.
SignalVector normalized_signals(const SystemManifest& manifest, std::span<const double> x);

/// White-box handle for the adaptive adversaries.
SystemOracle make_system_oracle(const SystemManifest& manifest);

void save_manifest(const SystemManifest& manifest, const std::string& dir);
SystemManifest load_manifest(const std::string& dir);

/// Serialized form of the manifest metadata (models stored separately).
std::string manifest_json_string(const SystemManifest& manifest);

}  // namespace amds
