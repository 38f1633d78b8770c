#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "amds/weights.hpp"
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

// Brute-force pair counting, ties worth one half: the AUC oracle.
double auc_oracle(const std::vector<double>& clean, const std::vector<double>& adv) {
    double wins = 0.0;
    for (double a : adv)
        for (double c : clean) {
            if (a > c) wins += 1.0;
            else if (a == c) wins += 0.5;
        }
    return wins / (static_cast<double>(clean.size()) * static_cast<double>(adv.size()));
}

// Full-enumeration grid optimum (0.01 resolution): the learn_weights oracle.
double grid_optimum_auc(const std::vector<SignalVector>& clean,
                        const std::vector<SignalVector>& adv) {
    double best = -1.0;
    for (int ia = 0; ia <= 100; ++ia)
        for (int ib = 0; ib <= 100 - ia; ++ib) {
            SignalWeights w{ia / 100.0, ib / 100.0, 1.0 - ia / 100.0 - ib / 100.0};
            std::vector<double> cs, as;
            for (const auto& s : clean) cs.push_back(ads(s, w));
            for (const auto& s : adv) as.push_back(ads(s, w));
            best = std::max(best, auc(cs, as));
        }
    return best;
}

}  // namespace

TEST_CASE("ads hand examples") {
    CHECK(ads(sig(0.7, 0.2, 0.9), {1.0, 0.0, 0.0}) == doctest::Approx(0.7));
    // Paper-reported generic weights on constant signals stay at the constant.
    CHECK(ads(sig(0.5, 0.5, 0.5), {0.163, 0.333, 0.504}) == doctest::Approx(0.5));
    CHECK(ads(sig(1.0, 0.0, 1.0), {0.2, 0.3, 0.5}) == doctest::Approx(0.7));
}

TEST_CASE("ads rejects off-simplex weights") {
    CHECK_THROWS_AS(ads(sig(0.5, 0.5, 0.5), {0.5, 0.5, 0.5}), DataError);
}

TEST_CASE("auc basics: separation, ties, hand case") {
    CHECK(auc(std::vector<double>{0.1, 0.2}, std::vector<double>{0.5, 0.9}) ==
          doctest::Approx(1.0));
    CHECK(auc(std::vector<double>{0.3, 0.3}, std::vector<double>{0.3, 0.3}) ==
          doctest::Approx(0.5));
    // clean {0.1, 0.4}, adv {0.3, 0.5}: 3 of 4 pairs won -> 0.75.
    CHECK(auc(std::vector<double>{0.1, 0.4}, std::vector<double>{0.3, 0.5}) ==
          doctest::Approx(0.75));
    CHECK_THROWS_AS(auc({}, std::vector<double>{0.1}), DataError);
}

TEST_CASE("rank-based auc equals brute-force pair counting exactly") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> size(1, 100);
    std::uniform_int_distribution<int> value(0, 20);  // coarse grid forces ties
    for (int t = 0; t < 500; ++t) {
        std::vector<double> clean(size(rng)), adv(size(rng));
        for (auto& v : clean) v = value(rng) / 20.0;
        for (auto& v : adv) v = value(rng) / 20.0;
        CHECK(auc(clean, adv) == auc_oracle(clean, adv));
    }
}

TEST_CASE("learn_weights: anomaly-only separable batch drives gamma >= 0.9") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    std::vector<SignalVector> clean, adv;
    for (int i = 0; i < 120; ++i) {
        clean.push_back(sig(noise(rng), noise(rng), 0.25 * noise(rng)));
        adv.push_back(sig(noise(rng), noise(rng), 0.75 + 0.25 * noise(rng)));
    }
    auto learned = learn_weights(clean, adv);
    CHECK(learned.weights.gamma >= 0.9);
    // Vertex dominance: the learned AUC beats each pure-signal weighting.
    for (auto vertex : {SignalWeights{1, 0, 0}, SignalWeights{0, 1, 0}, SignalWeights{0, 0, 1}}) {
        std::vector<double> cs, as;
        for (const auto& s : clean) cs.push_back(ads(s, vertex));
        for (const auto& s : adv) as.push_back(ads(s, vertex));
        CHECK(learned.auc >= auc(cs, as) - 1e-12);
    }
    // Optimizer returns at least the full-enumeration grid optimum.
    CHECK(learned.auc >= grid_optimum_auc(clean, adv) - 1e-12);
}

TEST_CASE("learn_weights: swapping clean and adv reflects the AUC") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    std::vector<SignalVector> clean, adv;
    for (int i = 0; i < 60; ++i) {
        clean.push_back(sig(noise(rng), noise(rng), noise(rng) * 0.6));
        adv.push_back(sig(noise(rng), noise(rng), 0.4 + noise(rng) * 0.6));
    }
    auto learned = learn_weights(clean, adv);
    std::vector<double> cs, as;
    for (const auto& s : clean) cs.push_back(ads(s, learned.weights));
    for (const auto& s : adv) as.push_back(ads(s, learned.weights));
    CHECK(auc(as, cs) == doctest::Approx(1.0 - learned.auc).epsilon(1e-12));
}

TEST_CASE("learn_weights: constant signals fall back to uniform with AUC 0.5") {
    std::vector<SignalVector> clean(40, sig(0.5, 0.5, 0.5));
    std::vector<SignalVector> adv(40, sig(0.5, 0.5, 0.5));
    auto learned = learn_weights(clean, adv);
    CHECK(learned.degenerate);
    CHECK(learned.auc == doctest::Approx(0.5));
    CHECK(learned.weights.alpha == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("learn_weights needs 30 samples per side") {
    std::vector<SignalVector> a(29), b(40);
    CHECK_THROWS_AS(learn_weights(a, b), DataError);
}

TEST_CASE("category_average: hand mean and simplex closure") {
    auto avg = category_average({{0.2, 0.6, 0.2}, {0.4, 0.4, 0.2}});
    CHECK(avg.alpha == doctest::Approx(0.3));
    CHECK(avg.beta == doctest::Approx(0.5));
    CHECK(avg.gamma == doctest::Approx(0.2));
    CHECK(std::abs(avg.alpha + avg.beta + avg.gamma - 1.0) < 1e-12);
    auto single = category_average({{0.1, 0.2, 0.7}});
    CHECK(single.gamma == doctest::Approx(0.7));
    CHECK_THROWS_AS(category_average({}), DataError);
}

TEST_CASE("category_average of the published per-attack gradient rows") {
    // FGSM (0.260,0.528,0.212), PGD-Linf (0.269,0.465,0.267),
    // C&W (0.306,0.434,0.261), SPSA (0.293,0.448,0.259): the componentwise
    // mean reproduces the published gradient-average row (0.282,0.469,0.250)
    // to print precision.
    auto avg = category_average({{0.260, 0.528, 0.212},
                                 {0.269, 0.465, 0.267},
                                 {0.306, 0.434, 0.261},
                                 {0.293, 0.448, 0.259}});
    CHECK(avg.alpha == doctest::Approx(0.282).epsilon(0.002));
    CHECK(avg.beta == doctest::Approx(0.469).epsilon(0.002));
    CHECK(avg.gamma == doctest::Approx(0.250).epsilon(0.002));
}

TEST_CASE("model_category_weights: equal accuracies give uniform") {
    std::vector<double> acc(6, 0.8);
    auto v = model_category_weights(acc);
    for (double w : v) CHECK(w == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("model_category_weights: cubic sharpening hand case") {
    // (1.0, 0.5 x5): weights = (1, 0.125 x5) / 1.625.
    std::vector<double> acc = {1.0, 0.5, 0.5, 0.5, 0.5, 0.5};
    auto v = model_category_weights(acc);
    CHECK(v[0] == doctest::Approx(1.0 / 1.625));
    for (int i = 1; i < 6; ++i) CHECK(v[i] == doctest::Approx(0.125 / 1.625));
    // Ratio law: v1/v2 = (acc1/acc2)^3.
    CHECK(v[0] / v[1] == doctest::Approx(8.0));
}

TEST_CASE("model_category_weights: all-zero accuracies fall back to uniform") {
    std::vector<double> acc(6, 0.0);
    auto v = model_category_weights(acc);
    for (double w : v) CHECK(w == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("blend boundary and hand cases") {
    std::vector<double> v = {1, 0, 0, 0, 0, 0};
    // conf = 0.75: boundary inclusive, weights unchanged.
    auto at_boundary = blend(v, 0.75);
    CHECK(at_boundary[0] == doctest::Approx(1.0));
    auto certain = blend(v, 1.0);
    CHECK(certain[0] == doctest::Approx(1.0));
    // conf = 0.2: 0.5 v + 0.5 uniform.
    auto blended = blend(v, 0.2);
    CHECK(blended[0] == doctest::Approx(0.5 + 0.5 / 6.0));
    for (int i = 1; i < 6; ++i) CHECK(blended[i] == doctest::Approx(0.5 / 6.0));
}

TEST_CASE("category_confidence reproduces the margin formula") {
    CHECK(category_confidence(0.50) == doctest::Approx(0.0));
    CHECK(category_confidence(0.62) == doctest::Approx(1.0));
    CHECK(category_confidence(0.56) == doctest::Approx(0.5));
    CHECK(category_confidence(0.95) == doctest::Approx(1.0));  // capped
}

TEST_CASE("ads is monotone nondecreasing in each signal") {
    SignalWeights w{0.3, 0.3, 0.4};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 0.9);
    for (int t = 0; t < 50; ++t) {
        auto base = sig(u(rng), u(rng), u(rng));
        double v0 = ads(base, w);
        auto bumped = base;
        bumped.entropy_n += 0.1;
        CHECK(ads(bumped, w) >= v0);
        bumped = base;
        bumped.disagreement_n += 0.1;
        CHECK(ads(bumped, w) >= v0);
        bumped = base;
        bumped.anomaly_n += 0.1;
        CHECK(ads(bumped, w) >= v0);
    }
}
