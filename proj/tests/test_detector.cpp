#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "amds/detector.hpp"
#include "doctest.h"

using namespace amds;

namespace {

SignalVector sig(double h, double d, double a) {
    SignalVector s;
    s.entropy_n = h;
    s.disagreement_n = d;
    s.anomaly_n = a;
    return s;
}

WeightBank demo_bank() {
    WeightBank bank;
    bank.generic = {0.163, 0.333, 0.504};
    bank.gradient_cat = {0.294, 0.452, 0.254};
    bank.distribution_cat = {0.443, 0.187, 0.370};
    return bank;
}

Thresholds calibrated_thresholds(double tau_detect = 0.5) {
    Thresholds t;
    t.tau_detect = tau_detect;
    return t;
}

}  // namespace

TEST_CASE("infer_category: strict inequality at the 0.50 boundary") {
    CHECK(infer_category(0.50) == AttackCategory::gradient);
    CHECK(infer_category(0.500001) == AttackCategory::distribution);
    CHECK(infer_category(0.75) == AttackCategory::distribution);
    CHECK(infer_category(0.12) == AttackCategory::gradient);
}

TEST_CASE("two_stage_detect: zero signals never trigger detection") {
    auto bank = demo_bank();
    auto t = calibrated_thresholds(0.3);
    auto r = two_stage_detect(sig(0, 0, 0), bank, t);
    CHECK(r.ads_refined == doctest::Approx(0.0));
    CHECK(r.y_detect == 0);
    CHECK(r.cascade_stage == 2);
}

TEST_CASE("two_stage_detect: high anomaly routes to distribution weights") {
    auto bank = demo_bank();
    auto t = calibrated_thresholds(0.99);
    auto s = sig(0.2, 0.1, 0.9);
    auto r = two_stage_detect(s, bank, t);
    CHECK(r.inferred_category == AttackCategory::distribution);
    CHECK(r.ads_refined == doctest::Approx(ads(s, bank.distribution_cat)));
    CHECK(r.ads_generic == doctest::Approx(ads(s, bank.generic)));
}

TEST_CASE("two_stage_detect refuses to run uncalibrated") {
    auto bank = demo_bank();
    Thresholds t;  // tau_detect unset
    CHECK_THROWS_AS(two_stage_detect(sig(0.5, 0.5, 0.5), bank, t), ConfigError);
}

TEST_CASE("calibrate_tau_detect: uniform scores put the threshold near 0.9") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> scores(5000);
    for (auto& s : scores) s = u(rng);
    double tau = calibrate_tau_detect(scores, 0.10);
    CHECK(tau == doctest::Approx(0.9).epsilon(0.02));
    // Realized FPR on the calibration set <= target + 1/n.
    double above = 0.0;
    for (double s : scores)
        if (s > tau) above += 1.0;
    CHECK(above / scores.size() <= 0.10 + 1.0 / scores.size());
}

TEST_CASE("calibrate_tau_detect: target 0 selects the maximum score") {
    std::vector<double> scores(200);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = i / 200.0;
    CHECK(calibrate_tau_detect(scores, 0.0) ==
          doctest::Approx(*std::max_element(scores.begin(), scores.end())));
}

TEST_CASE("calibrate_tau_detect: degenerate scores move just above the constant") {
    std::vector<double> scores(150, 0.42);
    CHECK(calibrate_tau_detect(scores, 0.10) == doctest::Approx(0.42 + 1e-6));
}

TEST_CASE("calibrate_tau_detect needs at least 100 scores") {
    std::vector<double> scores(99, 0.1);
    CHECK_THROWS_AS(calibrate_tau_detect(scores, 0.10), DataError);
}

namespace {

EnsembleOutput confident_output(double top_prob, double disagreement_value) {
    EnsembleOutput out;
    const int C = 4;
    out.prob_matrix = Matrix(6, C);
    out.ens_prob.assign(C, (1.0 - top_prob) / (C - 1));
    out.ens_prob[1] = top_prob;
    out.votes.assign(6, 1);
    out.ens_vote = 1;
    out.disagreement = disagreement_value;
    return out;
}

}  // namespace

TEST_CASE("cascade_route: confident samples exit at stage 1 without anomaly work") {
    auto bank = demo_bank();
    auto t = calibrated_thresholds(0.4);
    SignalNormalizer norm;  // identity-ish bounds
    CascadeCounters counters;
    bool anomaly_called = false;
    auto out = confident_output(0.99, 0.01);
    auto r = cascade_route(out, 0.05,
                           [&] {
                               anomaly_called = true;
                               return 1.0;
                           },
                           norm, bank, t, &counters);
    CHECK(r.cascade_stage == 1);
    CHECK(r.y_detect == 0);
    CHECK_FALSE(anomaly_called);
    CHECK(counters.stage1_fast_path == 1);
    CHECK(counters.mahalanobis_evals == 0);
}

TEST_CASE("cascade_route: uncertain samples trigger the Mahalanobis computation") {
    auto bank = demo_bank();
    auto t = calibrated_thresholds(10.0);  // nothing detected
    SignalNormalizer norm;
    norm.a_max = 2.0;
    CascadeCounters counters;
    bool anomaly_called = false;
    auto out = confident_output(0.5, 0.2);
    auto r = cascade_route(out, 0.7,
                           [&] {
                               anomaly_called = true;
                               return 1.0;
                           },
                           norm, bank, t, &counters);
    CHECK(anomaly_called);
    CHECK(r.cascade_stage == 2);
    CHECK(counters.stage2_entered == 1);
    CHECK(counters.mahalanobis_evals == 1);
}

TEST_CASE("cascade_route: detected samples reach stage 3") {
    auto bank = demo_bank();
    auto t = calibrated_thresholds(0.1);
    SignalNormalizer norm;
    CascadeCounters counters;
    auto out = confident_output(0.5, 0.2);
    auto r = cascade_route(out, 0.9, [] { return 0.9; }, norm, bank, t, &counters);
    CHECK(r.y_detect == 1);
    CHECK(r.cascade_stage == 3);
    CHECK(counters.stage3_entered == 1);
    CHECK(counters.adaptive_weighting == 1);
}

TEST_CASE("detection decision is invariant to joint monotone rescaling") {
    auto bank = demo_bank();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        auto s = sig(u(rng), u(rng), u(rng));
        double tau = u(rng);
        auto thr = calibrated_thresholds(tau);
        auto r = two_stage_detect(s, bank, thr);
        // Monotone map f(v) = 2v + 1 applied to both score and threshold.
        bool rescaled = (2.0 * r.ads_refined + 1.0) > (2.0 * tau + 1.0);
        CHECK(rescaled == (r.y_detect == 1));
    }
}
