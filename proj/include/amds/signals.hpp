#pragma once

#include <span>
#include <vector>

#include "amds/core.hpp"
#include "amds/dataset.hpp"

namespace amds {

/// Raw and min-max normalized detection signals for one sample.
struct SignalVector {
    double entropy = 0.0;       // H, nats
    double disagreement = 0.0;  // D
    double anomaly = 0.0;       // A, Mahalanobis distance
    double entropy_n = 0.0;     // normalized to [0,1]
    double disagreement_n = 0.0;
    double anomaly_n = 0.0;
};

/// Per-signal min-max bounds fitted once on the calibration pool
/// (validation clean + validation adversarial) and frozen afterwards.
struct SignalNormalizer {
    double h_min = 0.0, h_max = 1.0;
    double d_min = 0.0, d_max = 1.0;
    double a_min = 0.0, a_max = 1.0;
    bool h_degenerate = false, d_degenerate = false, a_degenerate = false;
};

/// Shannon entropy of the ensemble distribution, natural log, 0*log(0) = 0.
double entropy(std::span<const double> ens_prob);

/// Average per-class population variance of the six member probability rows.
double disagreement(const Matrix& prob_matrix);

/// Mahalanobis distance from the benign training distribution.
double anomaly(std::span<const double> x, const BenignDistribution& benign);

SignalNormalizer normalizer_fit(const std::vector<SignalVector>& calibration);
/// Fills the *_n fields, clipping to [0,1]; degenerate signals map to 0.5.
SignalVector normalizer_apply(const SignalNormalizer& norm, const SignalVector& raw);

}  // namespace amds
