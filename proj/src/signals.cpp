#include "amds/signals.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace amds {

double entropy(std::span<const double> ens_prob) {
    double sum = 0.0;
    for (double p : ens_prob) {
        if (p < -1e-9) throw DataError("entropy: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw DataError("entropy: input is not a probability simplex (sum=" +
                        std::to_string(sum) + ")");
    double h = 0.0;
    for (double p : ens_prob)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

double disagreement(const Matrix& prob_matrix) {
    if (prob_matrix.rows() != 6)
        throw DataError("disagreement: ensemble is fixed at 6 models, got " +
                        std::to_string(prob_matrix.rows()) + " rows");
    const std::size_t C = prob_matrix.cols();
    double total = 0.0;
    std::vector<double> col(6);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < 6; ++i) col[i] = prob_matrix.at(i, c);
        total += vec_var_population(col);
    }
    return total / static_cast<double>(C);
}

double anomaly(std::span<const double> x, const BenignDistribution& benign) {
    const std::size_t d = benign.mu.size();
    if (x.size() != d)
        throw DataError("anomaly: expected " + std::to_string(d) + " features, got " +
                        std::to_string(x.size()));
    std::vector<double> delta(d);
    for (std::size_t i = 0; i < d; ++i) delta[i] = x[i] - benign.mu[i];
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += benign.sigma_inv.at(i, j) * delta[j];
        q += delta[i] * s;
    }
    if (q < 0.0 && q > -1e-9) q = 0.0;  // round-off guard
    double a = std::sqrt(q);
    if (!std::isfinite(a))
        throw DataError("anomaly: non-finite Mahalanobis distance for sample");
    return a;
}

namespace {

void fit_bound(const std::vector<double>& values, double& lo, double& hi, bool& degenerate,
               const char* name) {
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    degenerate = !(hi > lo);
    if (degenerate)
        std::cerr << "warning: signal '" << name
                  << "' is constant over the calibration pool; mapping to 0.5\n";
}

double apply_bound(double v, double lo, double hi, bool degenerate) {
    if (degenerate) return 0.5;
    double n = (v - lo) / (hi - lo);
    return std::clamp(n, 0.0, 1.0);
}

}  // namespace

SignalNormalizer normalizer_fit(const std::vector<SignalVector>& calibration) {
    if (calibration.empty()) throw DataError("normalizer_fit: empty calibration batch");
    std::vector<double> h, d, a;
    h.reserve(calibration.size());
    d.reserve(calibration.size());
    a.reserve(calibration.size());
    for (const auto& s : calibration) {
        h.push_back(s.entropy);
        d.push_back(s.disagreement);
        a.push_back(s.anomaly);
    }
    SignalNormalizer n;
    fit_bound(h, n.h_min, n.h_max, n.h_degenerate, "entropy");
    fit_bound(d, n.d_min, n.d_max, n.d_degenerate, "disagreement");
    fit_bound(a, n.a_min, n.a_max, n.a_degenerate, "anomaly");
    return n;
}

SignalVector normalizer_apply(const SignalNormalizer& norm, const SignalVector& raw) {
    SignalVector out = raw;
    out.entropy_n = apply_bound(raw.entropy, norm.h_min, norm.h_max, norm.h_degenerate);
    out.disagreement_n =
        apply_bound(raw.disagreement, norm.d_min, norm.d_max, norm.d_degenerate);
    out.anomaly_n = apply_bound(raw.anomaly, norm.a_min, norm.a_max, norm.a_degenerate);
    return out;
}

}  // namespace amds
