#include "amds/detector.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace amds {

AttackCategory infer_category(double anomaly_n, double tau_anomaly) {
    return anomaly_n > tau_anomaly ? AttackCategory::distribution : AttackCategory::gradient;
}

DetectionResult two_stage_detect(const SignalVector& s, const WeightBank& bank,
                                 const Thresholds& thresholds) {
    thresholds.require_calibrated();
    DetectionResult r;
    r.ads_generic = ads(s, bank.generic);
    r.inferred_category = infer_category(s.anomaly_n, thresholds.tau_anomaly);
    r.ads_refined = ads(s, bank.category(r.inferred_category));
    r.y_detect = r.ads_refined > thresholds.tau_detect ? 1 : 0;
    r.cascade_stage = r.y_detect ? 3 : 2;
    return r;
}

double calibrate_tau_detect(std::vector<double> clean_refined_scores, double target_fpr) {
    if (clean_refined_scores.size() < 100)
        throw DataError("calibrate_tau_detect: need >= 100 clean validation scores, got " +
                        std::to_string(clean_refined_scores.size()));
    std::sort(clean_refined_scores.begin(), clean_refined_scores.end());
    if (clean_refined_scores.front() == clean_refined_scores.back()) {
        std::cerr << "warning: degenerate clean score distribution; tau_detect set just "
                     "above the constant\n";
        return clean_refined_scores.front() + 1e-6;
    }
    return quantile_sorted(clean_refined_scores, 1.0 - target_fpr);
}

DetectionResult cascade_route(const EnsembleOutput& ensemble_out, double raw_entropy,
                              const std::function<double()>& raw_anomaly,
                              const SignalNormalizer& normalizer, const WeightBank& bank,
                              const Thresholds& thresholds, CascadeCounters* counters) {
    if (counters) ++counters->samples;
    double max_prob = *std::max_element(ensemble_out.ens_prob.begin(),
                                        ensemble_out.ens_prob.end());
    if (max_prob > thresholds.tau_conf &&
        ensemble_out.disagreement < thresholds.tau_disagree) {
        if (counters) ++counters->stage1_fast_path;
        DetectionResult r;  // fast path: no anomaly computation, no detection
        r.cascade_stage = 1;
        return r;
    }
    if (counters) {
        ++counters->stage2_entered;
        ++counters->mahalanobis_evals;
    }
    SignalVector raw;
    raw.entropy = raw_entropy;
    raw.disagreement = ensemble_out.disagreement;
    raw.anomaly = raw_anomaly();
    auto result = two_stage_detect(normalizer_apply(normalizer, raw), bank, thresholds);
    if (counters && result.y_detect) {
        ++counters->stage3_entered;
        ++counters->adaptive_weighting;
    }
    return result;
}

}  // namespace amds
