#include "amds/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "amds/rng.hpp"

namespace amds {

std::string attack_name(AttackKind k) {
    switch (k) {
        case AttackKind::fgsm: return "fgsm";
        case AttackKind::pgd_linf: return "pgd_linf";
        case AttackKind::pgd_l2: return "pgd_l2";
        case AttackKind::cw_l2: return "cw_l2";
        case AttackKind::spsa: return "spsa";
        case AttackKind::injection: return "injection";
        case AttackKind::morphing: return "morphing";
        case AttackKind::adaptive_baseline: return "adaptive_baseline";
        case AttackKind::adaptive_improved: return "adaptive_improved";
    }
    throw ConfigError("unknown attack kind");
}

AttackKind attack_from_name(const std::string& name) {
    for (int k = 0; k <= static_cast<int>(AttackKind::adaptive_improved); ++k)
        if (attack_name(static_cast<AttackKind>(k)) == name)
            return static_cast<AttackKind>(k);
    throw ConfigError("unknown attack kind: " + name);
}

AttackCategory attack_category(AttackKind k) {
    switch (k) {
        case AttackKind::injection:
        case AttackKind::morphing: return AttackCategory::distribution;
        default: return AttackCategory::gradient;
    }
}

bool attack_is_gradient_based(AttackKind k) {
    return attack_category(k) == AttackCategory::gradient &&
           k != AttackKind::adaptive_baseline && k != AttackKind::adaptive_improved;
}

void AttackSpec::validate() const {
    if (attack_is_gradient_based(kind) && epsilon <= 0.0)
        throw ConfigError("attack '" + attack_name(kind) + "': epsilon must be > 0");
    if ((kind == AttackKind::injection || kind == AttackKind::morphing) && scale <= 0.0)
        throw ConfigError("attack '" + attack_name(kind) + "': scale must be > 0");
    if (kind == AttackKind::spsa && queries < 2)
        throw ConfigError("spsa: queries must be >= 2");
}

namespace {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void clip_linf(std::vector<double>& x, std::span<const double> center, double epsilon) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], center[i] - epsilon, center[i] + epsilon);
}

void project_l2(std::vector<double>& x, std::span<const double> center, double epsilon) {
    double norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        norm += (x[i] - center[i]) * (x[i] - center[i]);
    norm = std::sqrt(norm);
    if (norm <= epsilon || norm == 0.0) return;
    double f = epsilon / norm;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = center[i] + f * (x[i] - center[i]);
}

double ce_loss(const std::vector<double>& probs, int y) {
    return -std::log(std::max(probs[y], 1e-300));
}

}  // namespace

std::vector<double> fgsm(const Model& surrogate, std::span<const double> x, int y,
                         double epsilon) {
    auto grad = surrogate.input_gradient(x, y);  // throws for non-differentiable models
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += epsilon * sign(grad[i]);
    return out;
}

std::vector<double> pgd(const Model& surrogate, std::span<const double> x, int y,
                        double epsilon, int steps, double step_size, PgdNorm norm) {
    std::vector<double> cur(x.begin(), x.end());
    for (int s = 0; s < steps; ++s) {
        auto grad = surrogate.input_gradient(cur, y);
        if (norm == PgdNorm::linf) {
            for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += step_size * sign(grad[i]);
            clip_linf(cur, x, epsilon);
        } else {
            double gnorm = l2_norm(grad);
            if (gnorm > 0.0)
                for (std::size_t i = 0; i < cur.size(); ++i)
                    cur[i] += step_size * grad[i] / gnorm;
            project_l2(cur, x, epsilon);
        }
    }
    return cur;
}

std::vector<double> cw_l2(const Model& surrogate, std::span<const double> x, int y,
                          int binary_search_iters, double kappa) {
    auto margin_at = [&](std::span<const double> p) {
        auto z = surrogate.logits(p);
        double other = -1e300;
        int j_star = -1;
        for (std::size_t j = 0; j < z.size(); ++j) {
            if (static_cast<int>(j) == y) continue;
            if (z[j] > other) {
                other = z[j];
                j_star = static_cast<int>(j);
            }
        }
        return std::pair<double, int>{z[y] - other, j_star};
    };

    if (margin_at(x).first <= 0.0)  // already misclassified: f <= 0 at the start
        return {x.begin(), x.end()};

    std::vector<double> best;
    double best_norm = 1e300;
    double lo = 1e-3, hi = 1e3;
    const int inner_steps = 100;
    const double lr = 0.01;
    for (int iter = 0; iter < binary_search_iters; ++iter) {
        double c = std::sqrt(lo * hi);  // geometric bisection over [1e-3, 1e3]
        std::vector<double> cur(x.begin(), x.end());
        bool success = false;
        for (int s = 0; s < inner_steps; ++s) {
            auto [margin, j_star] = margin_at(cur);
            if (margin <= -kappa) {
                double norm = l2_dist(cur, x);
                if (margin <= 0.0 && norm < best_norm) {
                    best_norm = norm;
                    best = cur;
                    success = true;
                }
            }
            std::vector<double> grad(cur.size());
            for (std::size_t i = 0; i < cur.size(); ++i) grad[i] = 2.0 * (cur[i] - x[i]);
            if (margin > -kappa) {
                auto C = surrogate.class_count();
                std::vector<double> coeffs(C, 0.0);
                coeffs[y] = 1.0;
                coeffs[j_star] = -1.0;
                auto mg = surrogate.logit_combination_gradient(cur, coeffs);
                for (std::size_t i = 0; i < cur.size(); ++i) grad[i] += c * mg[i];
            }
            for (std::size_t i = 0; i < cur.size(); ++i) cur[i] -= lr * grad[i];
        }
        if (!success) {
            auto [margin, j_star] = margin_at(cur);
            (void)j_star;
            success = margin <= 0.0;
            if (success) {
                double norm = l2_dist(cur, x);
                if (norm < best_norm) {
                    best_norm = norm;
                    best = cur;
                }
            }
        }
        if (success)
            hi = c;  // try a smaller c for a smaller perturbation
        else
            lo = c;
    }
    if (best.empty()) return {x.begin(), x.end()};
    return best;
}

std::vector<double> spsa(const QueryFn& query, std::span<const double> x, int y,
                         int queries, double delta, double epsilon, double step_size,
                         int steps, std::uint64_t seed) {
    if (queries < 2) throw ConfigError("spsa: queries must be >= 2");
    if (steps < 1) steps = 1;
    if (step_size <= 0.0) step_size = epsilon / 10.0;
    auto rng = make_rng(seed);
    std::bernoulli_distribution coin(0.5);
    const std::size_t d = x.size();
    std::vector<double> cur(x.begin(), x.end());
    const int pairs_total = queries / 2;
    const int pairs_per_step = std::max(1, pairs_total / steps);
    std::vector<double> u(d), plus(d), minus(d), g(d);
    for (int s = 0; s < steps; ++s) {
        std::fill(g.begin(), g.end(), 0.0);
        for (int p = 0; p < pairs_per_step; ++p) {
            for (std::size_t i = 0; i < d; ++i) u[i] = coin(rng) ? 1.0 : -1.0;
            for (std::size_t i = 0; i < d; ++i) {
                plus[i] = cur[i] + delta * u[i];
                minus[i] = cur[i] - delta * u[i];
            }
            double diff = ce_loss(query(plus), y) - ce_loss(query(minus), y);
            for (std::size_t i = 0; i < d; ++i) g[i] += diff / (2.0 * delta) * u[i];
        }
        for (std::size_t i = 0; i < d; ++i) g[i] /= pairs_per_step;
        for (std::size_t i = 0; i < d; ++i) cur[i] += step_size * sign(g[i]);
        clip_linf(cur, x, epsilon);
    }
    return cur;
}

std::vector<double> injection(std::span<const double> x,
                              std::span<const double> feature_sigma, double scale,
                              std::mt19937_64& rng) {
    std::vector<double> out(x.begin(), x.end());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += gauss(rng) * scale * feature_sigma[i];
    return out;
}

std::vector<double> morphing(std::span<const double> x,
                             std::span<const double> feature_sigma, double scale) {
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * feature_sigma[i];
    return out;
}

AdaptiveResult adaptive_attack(const SystemOracle& oracle, const Model& surrogate,
                               std::span<const double> x, int y, AdaptiveVariant variant,
                               double epsilon, int iters, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t d = x.size();
    AdaptiveResult res;

    if (variant == AdaptiveVariant::baseline) {
        // Benign start, random direction search: accept a step only if it
        // keeps (or establishes) misclassification without raising the ADS.
        std::vector<double> cur(x.begin(), x.end());
        double cur_ads = oracle.ads_refined(cur);
        bool cur_mis = oracle.predict_class(cur) != y;
        double first_success_ads = cur_mis ? cur_ads : -1.0;
        const double step = epsilon / 4.0;
        std::vector<double> cand(d);
        for (int it = 0; it < iters; ++it) {
            double norm = 0.0;
            std::vector<double> u(d);
            for (std::size_t i = 0; i < d; ++i) {
                u[i] = gauss(rng);
                norm += u[i] * u[i];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (std::size_t i = 0; i < d; ++i) cand[i] = cur[i] + step * u[i] / norm;
            clip_linf(cand, x, epsilon);
            bool cand_mis = oracle.predict_class(cand) != y;
            if (!cand_mis) continue;
            double cand_ads = oracle.ads_refined(cand);
            if (!cur_mis || cand_ads <= cur_ads + 1e-12) {
                cur = cand;
                cur_ads = cand_ads;
                cur_mis = true;
                if (first_success_ads < 0.0) first_success_ads = cand_ads;
            }
        }
        res.x_adv = cur;
        res.success = cur_mis;
        if (res.success && first_success_ads > 1e-12)
            res.ads_reduction = std::max(0.0, (first_success_ads - cur_ads) / first_success_ads);
        return res;
    }

    // Improved: FGSM start, finite-difference ADS gradient descent. The
    // misclassification constraint is checked against the surrogate (the
    // attacker's differentiable proxy); success is judged against the full
    // system by the caller.
    std::vector<double> cur = fgsm(surrogate, x, y, epsilon);
    clip_linf(cur, x, epsilon);
    double start_ads = oracle.ads_refined(cur);
    double cur_ads = start_ads;
    bool cur_mis = surrogate.predict_class(cur) != y;
    const double fd_h = 1e-3;
    std::vector<double> grad(d), cand(d);
    for (int it = 0; it < iters && cur_mis; ++it) {
        for (std::size_t i = 0; i < d; ++i) {
            double keep = cur[i];
            cur[i] = keep + fd_h;
            double up = oracle.ads_refined(cur);
            cur[i] = keep - fd_h;
            double down = oracle.ads_refined(cur);
            cur[i] = keep;
            grad[i] = (up - down) / (2.0 * fd_h);
        }
        double gnorm = l2_norm(grad);
        if (gnorm < 1e-12) break;
        bool moved = false;
        double eta = epsilon / 10.0;
        for (int attempt = 0; attempt < 3 && !moved; ++attempt, eta *= 0.5) {
            for (std::size_t i = 0; i < d; ++i) cand[i] = cur[i] - eta * grad[i] / gnorm;
            clip_linf(cand, x, epsilon);
            if (surrogate.predict_class(cand) == y) continue;
            double cand_ads = oracle.ads_refined(cand);
            if (cand_ads < cur_ads) {
                cur = cand;
                cur_ads = cand_ads;
                moved = true;
            }
        }
        if (!moved) break;
    }
    res.x_adv = cur;
    res.success = oracle.predict_class(cur) != y;
    if (start_ads > 1e-12)
        res.ads_reduction = std::max(0.0, (start_ads - cur_ads) / start_ads);
    return res;
}

double validate_asr(std::span<const std::unique_ptr<Model>> models, const Matrix& clean,
                    const std::vector<int>& labels, const Matrix& adv) {
    if (clean.rows() != adv.rows())
        throw DataError("validate_asr: clean and adversarial batches misaligned");
    std::size_t correct = 0, flipped = 0;
    for (std::size_t i = 0; i < clean.rows(); ++i) {
        auto out = ensemble_forward(models, clean.row(i));
        if (out.ens_vote != labels[i]) continue;
        ++correct;
        auto adv_out = ensemble_forward(models, adv.row(i));
        if (adv_out.ens_vote != labels[i]) ++flipped;
    }
    if (correct == 0)
        throw DataError("validate_asr: no originally-correct samples; ASR undefined");
    return static_cast<double>(flipped) / static_cast<double>(correct);
}

AttackBatch generate_batch(const AttackSpec& spec, const Model& surrogate,
                           const QueryFn& ensemble_query, const Matrix& clean,
                           const std::vector<int>& labels,
                           std::span<const double> feature_sigma) {
    spec.validate();
    AttackBatch batch;
    batch.kind = spec.kind;
    batch.labels = labels;
    batch.adv_features = Matrix(clean.rows(), clean.cols());
    batch.origin_indices.resize(clean.rows());
    auto rng = make_rng(component_seed(spec.seed, "attack", static_cast<int>(spec.kind)));
    for (std::size_t i = 0; i < clean.rows(); ++i) {
        batch.origin_indices[i] = i;
        auto x = clean.row(i);
        int y = labels[i];
        std::vector<double> adv;
        switch (spec.kind) {
            case AttackKind::fgsm:
                adv = fgsm(surrogate, x, y, spec.epsilon);
                break;
            case AttackKind::pgd_linf:
                adv = pgd(surrogate, x, y, spec.epsilon, spec.steps, spec.step_size,
                          PgdNorm::linf);
                break;
            case AttackKind::pgd_l2:
                adv = pgd(surrogate, x, y, spec.epsilon, spec.steps, spec.step_size,
                          PgdNorm::l2);
                break;
            case AttackKind::cw_l2:
                adv = cw_l2(surrogate, x, y, spec.binary_search_iters, spec.kappa);
                break;
            case AttackKind::spsa:
                adv = spsa(ensemble_query, x, y, spec.queries, spec.delta, spec.epsilon,
                           spec.step_size, spec.steps,
                           component_seed(spec.seed, "spsa_sample", i));
                break;
            case AttackKind::injection:
                adv = injection(x, feature_sigma, spec.scale, rng);
                break;
            case AttackKind::morphing:
                adv = morphing(x, feature_sigma, spec.scale);
                break;
            default:
                throw ConfigError("generate_batch: adaptive attacks need a system oracle");
        }
        std::copy(adv.begin(), adv.end(), batch.adv_features.row(i).begin());
    }
    return batch;
}

}  // namespace amds
