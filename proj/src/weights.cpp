#include "amds/weights.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace amds {

void SignalWeights::check() const {
    if (alpha < -1e-9 || beta < -1e-9 || gamma < -1e-9)
        throw DataError("signal weights must be nonnegative");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-9)
        throw DataError("signal weights must sum to 1");
}

std::string category_name(AttackCategory c) {
    return c == AttackCategory::gradient ? "gradient" : "distribution";
}

double ads(const SignalVector& s, const SignalWeights& w) {
    w.check();
    return w.alpha * s.entropy_n + w.beta * s.disagreement_n + w.gamma * s.anomaly_n;
}

double auc(std::span<const double> clean_scores, std::span<const double> adv_scores) {
    if (clean_scores.empty() || adv_scores.empty())
        throw DataError("auc: both score sets must be nonempty");
    const std::size_t n = clean_scores.size() + adv_scores.size();
    // (score, is_adv) sorted ascending; average ranks over tied runs.
    std::vector<std::pair<double, int>> all;
    all.reserve(n);
    for (double v : clean_scores) all.push_back({v, 0});
    for (double v : adv_scores) all.push_back({v, 1});
    std::sort(all.begin(), all.end());
    double adv_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (all[k].second == 1) adv_rank_sum += avg_rank;
        i = j;
    }
    const double na = static_cast<double>(adv_scores.size());
    const double nc = static_cast<double>(clean_scores.size());
    double u = adv_rank_sum - na * (na + 1.0) / 2.0;
    return u / (na * nc);
}

namespace {

bool all_constant(const std::vector<SignalVector>& clean,
                  const std::vector<SignalVector>& adv) {
    auto minmax = [&](auto get) {
        double lo = 1e300, hi = -1e300;
        for (const auto& s : clean) {
            lo = std::min(lo, get(s));
            hi = std::max(hi, get(s));
        }
        for (const auto& s : adv) {
            lo = std::min(lo, get(s));
            hi = std::max(hi, get(s));
        }
        return hi - lo;
    };
    return minmax([](const SignalVector& s) { return s.entropy_n; }) <= 0.0 &&
           minmax([](const SignalVector& s) { return s.disagreement_n; }) <= 0.0 &&
           minmax([](const SignalVector& s) { return s.anomaly_n; }) <= 0.0;
}

}  // namespace

LearnedWeights learn_weights(const std::vector<SignalVector>& clean,
                             const std::vector<SignalVector>& adv) {
    if (clean.size() < 30 || adv.size() < 30)
        throw DataError("learn_weights: need >= 30 samples per side, got " +
                        std::to_string(clean.size()) + "/" + std::to_string(adv.size()));
    if (all_constant(clean, adv)) {
        std::cerr << "warning: learn_weights on constant signals; returning uniform\n";
        return {SignalWeights{}, 0.5, true};
    }

    // Precompute the three per-sample signal columns once; ADS is linear in w.
    auto columns = [](const std::vector<SignalVector>& batch) {
        std::array<std::vector<double>, 3> cols;
        for (auto& c : cols) c.reserve(batch.size());
        for (const auto& s : batch) {
            cols[0].push_back(s.entropy_n);
            cols[1].push_back(s.disagreement_n);
            cols[2].push_back(s.anomaly_n);
        }
        return cols;
    };
    auto cc = columns(clean);
    auto ac = columns(adv);
    std::vector<double> cs(clean.size()), as(adv.size());
    auto eval = [&](double a, double b, double g) {
        for (std::size_t i = 0; i < cs.size(); ++i)
            cs[i] = a * cc[0][i] + b * cc[1][i] + g * cc[2][i];
        for (std::size_t i = 0; i < as.size(); ++i)
            as[i] = a * ac[0][i] + b * ac[1][i] + g * ac[2][i];
        return auc(cs, as);
    };

    double best_auc = -1.0;
    SignalWeights best;
    // Exhaustive 0.01 grid; first strict improvement wins, so ties resolve to
    // the lexicographically earliest (alpha, beta).
    for (int ia = 0; ia <= 100; ++ia) {
        for (int ib = 0; ib <= 100 - ia; ++ib) {
            double a = ia / 100.0, b = ib / 100.0, g = 1.0 - a - b;
            double v = eval(a, b, g);
            if (v > best_auc) {
                best_auc = v;
                best = {a, b, g};
            }
        }
    }
    // Local 0.001 refinement around the grid optimum.
    SignalWeights refined = best;
    double refined_auc = best_auc;
    for (int da = -10; da <= 10; ++da) {
        for (int db = -10; db <= 10; ++db) {
            double a = best.alpha + da / 1000.0;
            double b = best.beta + db / 1000.0;
            double g = 1.0 - a - b;
            if (a < -1e-12 || b < -1e-12 || g < -1e-12) continue;
            a = std::max(a, 0.0);
            b = std::max(b, 0.0);
            g = std::max(g, 0.0);
            double v = eval(a, b, g);
            if (v > refined_auc) {
                refined_auc = v;
                refined = {a, b, g};
            }
        }
    }
    return {refined, refined_auc, false};
}

SignalWeights category_average(const std::vector<SignalWeights>& members) {
    if (members.empty()) throw DataError("category_average: empty category");
    SignalWeights out{0.0, 0.0, 0.0};
    for (const auto& w : members) {
        out.alpha += w.alpha;
        out.beta += w.beta;
        out.gamma += w.gamma;
    }
    const double n = static_cast<double>(members.size());
    out.alpha /= n;
    out.beta /= n;
    out.gamma /= n;
    return out;
}

std::vector<double> model_category_weights(std::span<const double> accuracies) {
    std::vector<double> out(accuracies.size());
    double denom = 0.0;
    for (double a : accuracies) {
        if (a < 0.0 || a > 1.0) throw DataError("model_category_weights: accuracy outside [0,1]");
        denom += a * a * a;
    }
    if (denom <= 0.0) {
        std::cerr << "warning: all category accuracies zero; using uniform model weights\n";
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = accuracies[i] * accuracies[i] * accuracies[i] / denom;
    return out;
}

std::vector<double> blend(std::span<const double> v_category, double conf) {
    double sum = 0.0;
    for (double v : v_category) sum += v;
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("blend: category weights off the simplex");
    std::vector<double> out(v_category.begin(), v_category.end());
    if (conf >= 0.75) return out;
    const double u = 1.0 / static_cast<double>(out.size());
    for (double& v : out) v = 0.5 * v + 0.5 * u;
    return out;
}

double category_confidence(double anomaly_n, double tau_anomaly) {
    return std::min(1.0, std::abs(anomaly_n - tau_anomaly) / 0.12);
}

}  // namespace amds
