#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "amds/eval.hpp"
#include "doctest.h"

using namespace amds;

TEST_CASE("accuracy and macro F1: perfect predictions") {
    std::vector<int> labels = {0, 1, 2, 0, 1, 2};
    CHECK(accuracy(labels, labels) == doctest::Approx(1.0));
    CHECK(f1_macro(labels, labels, 3) == doctest::Approx(1.0));
}

TEST_CASE("macro F1 hand confusion: all-zero predictions on balanced labels") {
    // 2-class, preds all 0, labels half/half: acc 0.5; F1_0 = 2/3, F1_1 = 0.
    std::vector<int> preds(10, 0);
    std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    CHECK(accuracy(preds, labels) == doctest::Approx(0.5));
    CHECK(f1_macro(preds, labels, 2) == doctest::Approx((2.0 / 3.0 + 0.0) / 2.0));
}

TEST_CASE("macro F1 skips classes absent from both sides") {
    std::vector<int> preds = {0, 1, 0, 1};
    std::vector<int> labels = {0, 1, 1, 1};
    // class_count = 5, but classes 2..4 never occur: macro over {0, 1} only.
    double expected = f1_macro(preds, labels, 2);
    CHECK(f1_macro(preds, labels, 5) == doctest::Approx(expected));
}

TEST_CASE("metrics reject empty input") {
    std::vector<int> empty;
    CHECK_THROWS_AS(accuracy(empty, empty), DataError);
    CHECK_THROWS_AS(f1_macro(empty, empty, 2), DataError);
}

TEST_CASE("bootstrap_ci: constant sample collapses the interval") {
    auto metric = [](const std::vector<std::size_t>& idx) {
        (void)idx;
        return 0.7;
    };
    auto ci = bootstrap_ci(metric, 50, 200, 0.95, 1);
    CHECK(ci.lo == doctest::Approx(0.7));
    CHECK(ci.point == doctest::Approx(0.7));
    CHECK(ci.hi == doctest::Approx(0.7));
}

TEST_CASE("bootstrap_ci: Bernoulli(0.5) width matches the normal approximation") {
    // n = 1000: width ~ 2 * 1.96 * sqrt(0.25/1000) ~ 0.062, within +-30%.
    const std::size_t n = 1000;
    std::vector<int> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = i % 2;
    auto metric = [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (auto i : idx) s += sample[i];
        return s / idx.size();
    };
    auto ci = bootstrap_ci(metric, n, 1000, 0.95, 3);
    double width = ci.hi - ci.lo;
    CHECK(width > 0.062 * 0.7);
    CHECK(width < 0.062 * 1.3);
    CHECK(ci.lo <= ci.point);
    CHECK(ci.point <= ci.hi);
}

TEST_CASE("bootstrap_ci is deterministic under a fixed seed") {
    std::vector<double> sample = {0.1, 0.9, 0.4, 0.7, 0.2, 0.8, 0.5};
    auto metric = [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (auto i : idx) s += sample[i];
        return s / idx.size();
    };
    auto a = bootstrap_ci(metric, sample.size(), 500, 0.95, 42);
    auto b = bootstrap_ci(metric, sample.size(), 500, 0.95, 42);
    CHECK(a.lo == b.lo);
    CHECK(a.point == b.point);
    CHECK(a.hi == b.hi);
}

TEST_CASE("dimensionality study: L2 norm scales as sqrt(d)") {
    auto table = table6_scaling({77, 190}, 0.02, 7);
    REQUIRE(table.contains("ratio_77_to_190"));
    double ratio = table["ratio_77_to_190"].get<double>();
    CHECK(ratio == doctest::Approx(std::sqrt(190.0 / 77.0)).epsilon(1e-3));
    for (const auto& row : table["rows"]) {
        CHECK(row["mean_fgsm_l2"].get<double>() ==
              doctest::Approx(row["expected_eps_sqrt_d"].get<double>()).epsilon(1e-6));
        CHECK(row["clean_accuracy"].get<double>() >= 0.75);
    }
    // Quadrupling d doubles the norm.
    auto quad = table6_scaling({20, 80}, 0.02, 9);
    double l2_20 = quad["rows"][0]["mean_fgsm_l2"].get<double>();
    double l2_80 = quad["rows"][1]["mean_fgsm_l2"].get<double>();
    CHECK(l2_80 / l2_20 == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("report renderer produces aligned text for row tables") {
    nlohmann::json t;
    t["rows"] = nlohmann::json::array();
    t["rows"].push_back({{"attack", "fgsm"}, {"auc", 0.9431}});
    t["rows"].push_back({{"attack", "morphing"}, {"auc", 0.9876}});
    t["note"] = "demo";
    auto text = render_report_text({{"Demo table", t}});
    CHECK(text.find("Demo table") != std::string::npos);
    CHECK(text.find("fgsm") != std::string::npos);
    CHECK(text.find("0.9431") != std::string::npos);
    CHECK(text.find("note") != std::string::npos);
}
