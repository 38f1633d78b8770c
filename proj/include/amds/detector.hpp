#pragma once

#include <functional>
#include <span>
#include <vector>

#include "amds/core.hpp"
#include "amds/models.hpp"
#include "amds/signals.hpp"
#include "amds/weights.hpp"

namespace amds {

struct Thresholds {
    double tau_conf = 0.85;      // cascade stage-1 confidence gate
    double tau_disagree = 0.15;  // cascade stage-1 disagreement gate
    double tau_anomaly = 0.50;   // category inference
    double tau_detect = -1.0;    // calibrated; negative = not calibrated
    double conf_scale = 0.12;
    double conf_cutoff = 0.75;

    bool calibrated() const { return tau_detect >= 0.0; }
    void require_calibrated() const {
        if (!calibrated())
            throw ConfigError("tau_detect has not been calibrated; run threshold tuning");
    }
};

struct DetectionResult {
    int y_detect = 0;
    AttackCategory inferred_category = AttackCategory::gradient;
    double ads_generic = 0.0;
    double ads_refined = 0.0;
    int cascade_stage = 1;
};

/// distribution iff normalized anomaly strictly exceeds tau_anomaly.
AttackCategory infer_category(double anomaly_n, double tau_anomaly = 0.50);

DetectionResult two_stage_detect(const SignalVector& normalized, const WeightBank& bank,
                                 const Thresholds& thresholds);

/// (1 - target_fpr) quantile of clean refined scores, interpolated.
double calibrate_tau_detect(std::vector<double> clean_refined_scores,
                            double target_fpr = 0.10);

/// Aggregate instrumentation counters for cascade routing (Table-style
/// export: cumulative stage counts plus expensive-operation counts).
struct CascadeCounters {
    std::size_t samples = 0;
    std::size_t stage1_fast_path = 0;
    std::size_t stage2_entered = 0;
    std::size_t stage3_entered = 0;
    std::size_t mahalanobis_evals = 0;
    std::size_t adaptive_weighting = 0;
};

/// The anomaly signal is supplied lazily so the stage-1 fast path can skip
/// the O(d^2) Mahalanobis computation entirely.
DetectionResult cascade_route(const EnsembleOutput& ensemble_out, double raw_entropy,
                              const std::function<double()>& raw_anomaly,
                              const SignalNormalizer& normalizer, const WeightBank& bank,
                              const Thresholds& thresholds, CascadeCounters* counters);

}  // namespace amds
