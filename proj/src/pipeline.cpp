#include "amds/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numeric>
#include <sstream>

#include "amds/rng.hpp"
#include "json.hpp"

namespace amds {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fingerprint(const LabeledDataset& train, const LabeledDataset& val) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001B3ULL;
    };
    auto mix_dataset = [&](const LabeledDataset& ds) {
        mix(ds.size());
        mix(ds.dims());
        for (double v : ds.features.data()) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            mix(bits);
        }
        for (int l : ds.labels) mix(static_cast<std::uint64_t>(l));
    };
    mix_dataset(train);
    mix_dataset(val);
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

// Deterministic subsample: seeded shuffle, first n indices, sorted.
std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t n,
                                           std::uint64_t seed) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n, total));
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct SignalBatch {
    std::vector<SignalVector> raw;
};

SignalBatch compute_raw_signals(const std::vector<std::unique_ptr<Model>>& models,
                                const BenignDistribution& benign, const Matrix& X) {
    SignalBatch out;
    out.raw.resize(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto ens = ensemble_forward(models, X.row(i));
        out.raw[i].entropy = entropy(ens.ens_prob);
        out.raw[i].disagreement = ens.disagreement;
        out.raw[i].anomaly = anomaly(X.row(i), benign);
    }
    return out;
}

std::vector<SignalVector> normalize_batch(const SignalNormalizer& norm,
                                          const std::vector<SignalVector>& raw) {
    std::vector<SignalVector> out;
    out.reserve(raw.size());
    for (const auto& s : raw) out.push_back(normalizer_apply(norm, s));
    return out;
}

json weights_to_json(const SignalWeights& w) {
    return json{{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}};
}
SignalWeights weights_from_json(const json& j) {
    return {j.at("alpha"), j.at("beta"), j.at("gamma")};
}

}  // namespace

SignalVector raw_signals(const SystemManifest& m, std::span<const double> x) {
    auto ens = ensemble_forward(m.models, x);
    SignalVector s;
    s.entropy = entropy(ens.ens_prob);
    s.disagreement = ens.disagreement;
    s.anomaly = anomaly(x, m.benign);
    return s;
}

SignalVector normalized_signals(const SystemManifest& m, std::span<const double> x) {
    return normalizer_apply(m.normalizer, raw_signals(m, x));
}

SystemManifest train(const TrainOptions& opts, const LabeledDataset& train_std,
                     const LabeledDataset& val_std, const Scaler& scaler) {
    auto log = [&](const std::string& msg) {
        if (opts.verbose) std::cerr << "[train] " << msg << "\n";
    };
    SystemManifest m;
    m.master_seed = opts.master_seed;
    m.dataset_fingerprint = fingerprint(train_std, val_std);
    m.scaler = scaler;
    m.weight_attack_samples = opts.attack_sample_count;
    m.class_count = train_std.class_count;
    m.feature_count = train_std.dims();

    // Stage 1: baseline model training with the accuracy gate.
    log("stage 1: training six ensemble models");
    auto specs = standard_ensemble_specs(opts.master_seed);
    m.models.resize(specs.size());
    {
        std::vector<std::future<std::unique_ptr<Model>>> futures;
        for (const auto& spec : specs)
            futures.push_back(std::async(
                opts.jobs > 1 ? std::launch::async : std::launch::deferred,
                [&train_std, spec] { return fit(spec, train_std); }));
        for (std::size_t i = 0; i < futures.size(); ++i) m.models[i] = futures[i].get();
    }
    std::string gate_failures;
    for (std::size_t i = 0; i < m.models.size(); ++i) {
        double acc = model_accuracy(*m.models[i], val_std);
        m.model_val_accuracy.push_back(acc);
        log("  " + paradigm_name(specs[i].paradigm) +
            " validation accuracy: " + std::to_string(acc));
        if (acc <= opts.model_gate)
            gate_failures += (gate_failures.empty() ? "" : ", ") +
                             paradigm_name(specs[i].paradigm) + "=" + std::to_string(acc);
    }
    if (!gate_failures.empty())
        throw GateError("stage 1 accuracy gate (>" + std::to_string(opts.model_gate) +
                        ") failed: " + gate_failures);

    // Stage 2: adversarial sample generation on validation data.
    log("stage 2: generating validation attacks");
    m.benign = benign_stats(train_std, 0);
    const Model& surrogate = *m.models[5];  // MLP member, canonical slot order
    QueryFn ensemble_query = [&](std::span<const double> x) {
        return ensemble_forward(m.models, x).ens_prob;
    };
    auto val_idx = subsample_indices(val_std.size(),
                                     static_cast<std::size_t>(opts.attack_sample_count),
                                     component_seed(opts.master_seed, "attack_subsample"));
    Matrix val_subset(val_idx.size(), val_std.dims());
    std::vector<int> val_subset_labels(val_idx.size());
    for (std::size_t i = 0; i < val_idx.size(); ++i) {
        auto r = val_std.features.row(val_idx[i]);
        std::copy(r.begin(), r.end(), val_subset.row(i).begin());
        val_subset_labels[i] = val_std.labels[val_idx[i]];
    }
    // Distribution attacks use the training std of the features the system
    // actually scores, i.e. the standardized space (near 1 by construction).
    std::vector<double> attack_sigma(train_std.dims());
    {
        std::vector<double> col(train_std.size());
        for (std::size_t j = 0; j < train_std.dims(); ++j) {
            for (std::size_t i = 0; i < train_std.size(); ++i)
                col[i] = train_std.features.at(i, j);
            attack_sigma[j] = vec_std_population(col);
        }
    }

    std::map<std::string, AttackBatch> val_batches;
    for (auto spec : opts.attacks) {
        spec.seed = component_seed(opts.master_seed, "attack", static_cast<int>(spec.kind));
        auto batch = generate_batch(spec, surrogate, ensemble_query, val_subset,
                                    val_subset_labels, attack_sigma);
        batch.asr = validate_asr(m.models, val_subset, val_subset_labels,
                                 batch.adv_features);
        bool included = batch.asr > opts.asr_gate || !opts.exclude_below_gate_from_weights;
        log("  " + attack_name(spec.kind) + " ASR=" + std::to_string(batch.asr) +
            (batch.asr > opts.asr_gate ? "" : "  [below gate, flagged]"));
        m.attacks.push_back({spec, batch.asr, included});
        val_batches.emplace(attack_name(spec.kind), std::move(batch));
    }

    // Stage 3: weight learning at the three granularities.
    log("stage 3: learning detection weights");
    auto clean_raw = compute_raw_signals(m.models, m.benign, val_std.features);
    std::map<std::string, SignalBatch> adv_raw;
    std::vector<SignalVector> calibration = clean_raw.raw;
    for (const auto& [name, batch] : val_batches) {
        adv_raw[name] = compute_raw_signals(m.models, m.benign, batch.adv_features);
        auto& pool = adv_raw[name].raw;
        calibration.insert(calibration.end(), pool.begin(), pool.end());
    }
    m.normalizer = normalizer_fit(calibration);

    auto clean_n = normalize_batch(m.normalizer, clean_raw.raw);
    std::map<std::string, std::vector<SignalVector>> adv_n;
    for (const auto& [name, batch] : adv_raw)
        adv_n[name] = normalize_batch(m.normalizer, batch.raw);

    std::vector<SignalVector> pooled, pooled_gradient, pooled_distribution;
    std::vector<SignalWeights> grad_members, dist_members;
    for (const auto& rec : m.attacks) {
        const auto name = attack_name(rec.spec.kind);
        auto learned = learn_weights(clean_n, adv_n[name]);
        if (!rec.included_in_weight_learning) {
            // Learned for the record (the weak-attack row of the weights
            // table) but kept out of the bank and the category averages.
            m.weight_bank.excluded_per_attack[name] = learned.weights;
            m.weight_bank.excluded_per_attack_auc[name] = learned.auc;
            log("  " + name + " (excluded): auc=" + std::to_string(learned.auc));
            continue;
        }
        m.weight_bank.per_attack[name] = learned.weights;
        m.weight_bank.per_attack_auc[name] = learned.auc;
        log("  " + name + ": alpha=" + std::to_string(learned.weights.alpha) +
            " beta=" + std::to_string(learned.weights.beta) +
            " gamma=" + std::to_string(learned.weights.gamma) +
            " auc=" + std::to_string(learned.auc));
        auto& pool = adv_n[name];
        pooled.insert(pooled.end(), pool.begin(), pool.end());
        if (attack_category(rec.spec.kind) == AttackCategory::gradient) {
            grad_members.push_back(learned.weights);
            pooled_gradient.insert(pooled_gradient.end(), pool.begin(), pool.end());
        } else {
            dist_members.push_back(learned.weights);
            pooled_distribution.insert(pooled_distribution.end(), pool.begin(), pool.end());
        }
    }
    if (grad_members.empty() || dist_members.empty())
        throw GateError("stage 3: a category has no attacks above the ASR gate; "
                        "cannot learn category weights");
    auto generic = learn_weights(clean_n, pooled);
    m.weight_bank.generic = generic.weights;
    m.weight_bank.generic_auc = generic.auc;
    m.weight_bank.gradient_cat = category_average(grad_members);
    m.weight_bank.distribution_cat = category_average(dist_members);
    m.weight_bank.gradient_cat_direct = learn_weights(clean_n, pooled_gradient).weights;
    m.weight_bank.distribution_cat_direct =
        learn_weights(clean_n, pooled_distribution).weights;

    // Attack-adaptive model weights: per-model accuracy on each category's
    // validation attacks, cubic sharpening.
    for (AttackCategory cat : {AttackCategory::gradient, AttackCategory::distribution}) {
        std::vector<double> acc(6, 0.0);
        std::size_t total = 0;
        std::vector<std::size_t> correct(6, 0);
        for (const auto& rec : m.attacks) {
            if (attack_category(rec.spec.kind) != cat) continue;
            // Gate-consistent: only attacks that proved effective shape the
            // category's model weights.
            if (!rec.included_in_weight_learning) continue;
            const auto& batch = val_batches.at(attack_name(rec.spec.kind));
            for (std::size_t i = 0; i < batch.adv_features.rows(); ++i) {
                if (batch.labels[i] == 0) continue;  // accuracy on attacked malicious traffic
                for (std::size_t k = 0; k < 6; ++k)
                    if (m.models[k]->predict_class(batch.adv_features.row(i)) ==
                        batch.labels[i])
                        ++correct[k];
                ++total;
            }
        }
        for (std::size_t k = 0; k < 6; ++k)
            acc[k] = total ? static_cast<double>(correct[k]) / total : 0.0;
        auto v = model_category_weights(acc);
        (cat == AttackCategory::gradient ? m.model_weights.gradient
                                         : m.model_weights.distribution) = v;
    }

    // Stage 4: threshold tuning.
    log("stage 4: tuning thresholds");
    if (opts.tune_tau_anomaly) {
        std::vector<std::pair<double, double>> sweep;  // (tau, accuracy)
        double best_acc = -1.0;
        for (int t = 20; t <= 80; ++t) {
            double tau = t / 100.0;
            std::size_t correct = 0, total = 0;
            for (const auto& rec : m.attacks) {
                const auto name = attack_name(rec.spec.kind);
                for (const auto& s : adv_n[name]) {
                    if (infer_category(s.anomaly_n, tau) == attack_category(rec.spec.kind))
                        ++correct;
                    ++total;
                }
            }
            double acc = total ? static_cast<double>(correct) / total : 0.0;
            sweep.push_back({tau, acc});
            best_acc = std::max(best_acc, acc);
        }
        // Max-margin pick: the midpoint of the near-optimal plateau keeps the
        // category boundary away from both signal bands.
        double lo = 1.0, hi = 0.0;
        for (const auto& [tau, acc] : sweep) {
            if (acc < best_acc - 0.005) continue;
            lo = std::min(lo, tau);
            hi = std::max(hi, tau);
        }
        double mid = 0.5 * (lo + hi);
        double best_tau = 0.50, best_dist = 1e9;
        for (const auto& [tau, acc] : sweep) {
            if (acc < best_acc - 0.005) continue;
            if (std::abs(tau - mid) < best_dist) {
                best_dist = std::abs(tau - mid);
                best_tau = tau;
            }
        }
        m.thresholds.tau_anomaly = best_tau;
        log("  tau_anomaly tuned to " + std::to_string(best_tau) +
            " (inference accuracy " + std::to_string(best_acc) + ")");
    }
    std::vector<double> clean_refined(clean_n.size());
    for (std::size_t i = 0; i < clean_n.size(); ++i) {
        auto cat = infer_category(clean_n[i].anomaly_n, m.thresholds.tau_anomaly);
        clean_refined[i] = ads(clean_n[i], m.weight_bank.category(cat));
    }
    m.thresholds.tau_detect = calibrate_tau_detect(clean_refined, opts.target_fpr);
    log("  tau_detect = " + std::to_string(m.thresholds.tau_detect));
    return m;
}

DualOutput infer(std::span<const double> x, const SystemManifest& m,
                 const InferenceOptions& opts, CascadeCounters* counters) {
    if (x.size() != m.feature_count)
        throw DataError("infer: expected " + std::to_string(m.feature_count) +
                        " features, got " + std::to_string(x.size()));
    m.thresholds.require_calibrated();
    if (counters) ++counters->samples;

    auto ens = ensemble_forward(m.models, x);
    DualOutput out;
    out.confidence_class = *std::max_element(ens.ens_prob.begin(), ens.ens_prob.end());

    // Cascade stage-1 check: confident, low-disagreement samples classify
    // immediately; the Mahalanobis distance is never computed.
    if (opts.cascade && out.confidence_class > m.thresholds.tau_conf &&
        ens.disagreement < m.thresholds.tau_disagree) {
        if (counters) ++counters->stage1_fast_path;
        out.y_detect = 0;
        out.y_class = ens.ens_vote;
        out.confidence_detect = 0.0;
        out.cascade_stage = 1;
        return out;
    }
    if (counters) {
        ++counters->stage2_entered;
        ++counters->mahalanobis_evals;
    }

    SignalVector raw;
    raw.entropy = entropy(ens.ens_prob);
    raw.disagreement = ens.disagreement;
    raw.anomaly = anomaly(x, m.benign);
    auto s = normalizer_apply(m.normalizer, raw);

    DetectionResult det;
    det.ads_generic = ads(s, m.weight_bank.generic);
    det.inferred_category = infer_category(s.anomaly_n, m.thresholds.tau_anomaly);
    switch (opts.weights) {
        case InferenceOptions::DetectionWeights::two_stage:
            det.ads_refined = ads(s, m.weight_bank.category(det.inferred_category));
            break;
        case InferenceOptions::DetectionWeights::generic_only:
            det.ads_refined = det.ads_generic;
            break;
        case InferenceOptions::DetectionWeights::direct_category:
            det.ads_refined =
                ads(s, det.inferred_category == AttackCategory::gradient
                           ? m.weight_bank.gradient_cat_direct
                           : m.weight_bank.distribution_cat_direct);
            break;
    }
    det.y_detect =
        opts.detection && det.ads_refined > m.thresholds.tau_detect ? 1 : 0;

    out.inferred_category = det.inferred_category;
    out.confidence_detect = std::min(1.0, det.ads_refined / m.thresholds.tau_detect);
    if (det.y_detect == 0) {
        out.y_detect = 0;
        out.y_class = ens.ens_vote;
        out.cascade_stage = 2;
        return out;
    }
    if (counters) {
        ++counters->stage3_entered;
        ++counters->adaptive_weighting;
    }
    out.y_detect = 1;
    out.cascade_stage = 3;
    if (!opts.adaptive_weighting) {
        out.y_class = ens.ens_vote;
        return out;
    }
    double conf = category_confidence(s.anomaly_n, m.thresholds.tau_anomaly);
    auto v_final = blend(m.model_weights.category(det.inferred_category), conf);
    out.y_class = weighted_vote(ens.prob_matrix, v_final);
    return out;
}

std::pair<std::vector<DualOutput>, InferenceStats>
infer_batch(const Matrix& X, const SystemManifest& m, const InferenceOptions& opts) {
    std::vector<DualOutput> results(X.rows());
    InferenceStats stats;
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < X.rows(); ++i)
        results[i] = infer(X.row(i), m, opts, &stats.counters);
    auto t1 = std::chrono::steady_clock::now();
    stats.total_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    stats.ms_per_sample = X.rows() ? stats.total_ms / static_cast<double>(X.rows()) : 0.0;
    return {std::move(results), stats};
}

SystemOracle make_system_oracle(const SystemManifest& m) {
    SystemOracle oracle;
    oracle.ads_refined = [&m](std::span<const double> x) {
        auto s = normalized_signals(m, x);
        auto cat = infer_category(s.anomaly_n, m.thresholds.tau_anomaly);
        return ads(s, m.weight_bank.category(cat));
    };
    oracle.predict_class = [&m](std::span<const double> x) {
        return infer(x, m).y_class;
    };
    return oracle;
}

namespace {

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}
Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows"), j.at("cols"));
    m.data() = j.at("data").get<std::vector<double>>();
    return m;
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write " + path.string());
        out << content;
    }
    fs::rename(tmp, path);
}

}  // namespace

std::string manifest_json_string(const SystemManifest& m) {
    json j;
    j["format_version"] = m.format_version;
    j["master_seed"] = m.master_seed;
    j["dataset_fingerprint"] = m.dataset_fingerprint;
    j["class_count"] = m.class_count;
    j["feature_count"] = m.feature_count;
    j["model_val_accuracy"] = m.model_val_accuracy;
    j["weight_attack_samples"] = m.weight_attack_samples;
    json files = json::array();
    for (std::size_t i = 0; i < m.models.size(); ++i)
        files.push_back("models/model_" + std::to_string(i) + ".json");
    j["model_files"] = files;
    j["benign"] = {{"mu", m.benign.mu},
                   {"sigma", matrix_to_json(m.benign.sigma)},
                   {"ridge_lambda", m.benign.ridge_lambda}};
    j["normalizer"] = {
        {"entropy", {{"min", m.normalizer.h_min}, {"max", m.normalizer.h_max},
                     {"degenerate", m.normalizer.h_degenerate}}},
        {"disagreement", {{"min", m.normalizer.d_min}, {"max", m.normalizer.d_max},
                          {"degenerate", m.normalizer.d_degenerate}}},
        {"anomaly", {{"min", m.normalizer.a_min}, {"max", m.normalizer.a_max},
                     {"degenerate", m.normalizer.a_degenerate}}}};
    json per_attack = json::object();
    for (const auto& [name, w] : m.weight_bank.per_attack) {
        per_attack[name] = weights_to_json(w);
        per_attack[name]["auc"] = m.weight_bank.per_attack_auc.at(name);
    }
    json excluded = json::object();
    for (const auto& [name, w] : m.weight_bank.excluded_per_attack) {
        excluded[name] = weights_to_json(w);
        excluded[name]["auc"] = m.weight_bank.excluded_per_attack_auc.at(name);
    }
    j["weight_bank"] = {{"generic", weights_to_json(m.weight_bank.generic)},
                        {"generic_auc", m.weight_bank.generic_auc},
                        {"per_attack", per_attack},
                        {"excluded_per_attack", excluded},
                        {"gradient_cat", weights_to_json(m.weight_bank.gradient_cat)},
                        {"distribution_cat", weights_to_json(m.weight_bank.distribution_cat)},
                        {"gradient_cat_direct",
                         weights_to_json(m.weight_bank.gradient_cat_direct)},
                        {"distribution_cat_direct",
                         weights_to_json(m.weight_bank.distribution_cat_direct)}};
    j["model_weights"] = {{"gradient", m.model_weights.gradient},
                          {"distribution", m.model_weights.distribution}};
    j["thresholds"] = {{"tau_conf", m.thresholds.tau_conf},
                       {"tau_disagree", m.thresholds.tau_disagree},
                       {"tau_anomaly", m.thresholds.tau_anomaly},
                       {"tau_detect", m.thresholds.tau_detect},
                       {"conf_scale", m.thresholds.conf_scale},
                       {"conf_cutoff", m.thresholds.conf_cutoff}};
    json attacks = json::array();
    for (const auto& rec : m.attacks) {
        attacks.push_back({{"kind", attack_name(rec.spec.kind)},
                           {"epsilon", rec.spec.epsilon},
                           {"steps", rec.spec.steps},
                           {"step_size", rec.spec.step_size},
                           {"queries", rec.spec.queries},
                           {"delta", rec.spec.delta},
                           {"scale", rec.spec.scale},
                           {"seed", rec.spec.seed},
                           {"asr", rec.asr},
                           {"included_in_weight_learning",
                            rec.included_in_weight_learning}});
    }
    j["attacks"] = attacks;
    return j.dump(2);
}

void save_manifest(const SystemManifest& m, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "models");
    atomic_write(fs::path(dir) / "manifest.json", manifest_json_string(m));
    atomic_write(fs::path(dir) / "scaler.json", m.scaler.to_json_string());
    for (std::size_t i = 0; i < m.models.size(); ++i)
        atomic_write(fs::path(dir) / "models" / ("model_" + std::to_string(i) + ".json"),
                     m.models[i]->to_json_string());
}

SystemManifest load_manifest(const std::string& dir) {
    auto read_file = [](const fs::path& p) {
        std::ifstream in(p);
        if (!in) throw ConfigError("manifest incomplete: missing " + p.string());
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    json j;
    try {
        j = json::parse(read_file(fs::path(dir) / "manifest.json"));
    } catch (const json::exception& e) {
        throw ConfigError("manifest.json unreadable: " + std::string(e.what()));
    }
    SystemManifest m;
    try {
        m.format_version = j.at("format_version");
        m.master_seed = j.at("master_seed");
        m.dataset_fingerprint = j.at("dataset_fingerprint");
        m.class_count = j.at("class_count");
        m.feature_count = j.at("feature_count");
        m.model_val_accuracy = j.at("model_val_accuracy").get<std::vector<double>>();
        m.weight_attack_samples = j.at("weight_attack_samples");
        m.benign.mu = j.at("benign").at("mu").get<std::vector<double>>();
        m.benign.sigma = matrix_from_json(j.at("benign").at("sigma"));
        m.benign.ridge_lambda = j.at("benign").at("ridge_lambda");
        Matrix reg = m.benign.sigma;
        for (std::size_t i = 0; i < reg.rows(); ++i) reg.at(i, i) += m.benign.ridge_lambda;
        m.benign.sigma_inv = spd_inverse(reg);
        const auto& n = j.at("normalizer");
        m.normalizer.h_min = n.at("entropy").at("min");
        m.normalizer.h_max = n.at("entropy").at("max");
        m.normalizer.h_degenerate = n.at("entropy").at("degenerate");
        m.normalizer.d_min = n.at("disagreement").at("min");
        m.normalizer.d_max = n.at("disagreement").at("max");
        m.normalizer.d_degenerate = n.at("disagreement").at("degenerate");
        m.normalizer.a_min = n.at("anomaly").at("min");
        m.normalizer.a_max = n.at("anomaly").at("max");
        m.normalizer.a_degenerate = n.at("anomaly").at("degenerate");
        const auto& wb = j.at("weight_bank");
        m.weight_bank.generic = weights_from_json(wb.at("generic"));
        m.weight_bank.generic_auc = wb.at("generic_auc");
        for (auto it = wb.at("per_attack").begin(); it != wb.at("per_attack").end(); ++it) {
            m.weight_bank.per_attack[it.key()] = weights_from_json(it.value());
            m.weight_bank.per_attack_auc[it.key()] = it.value().at("auc");
        }
        for (auto it = wb.at("excluded_per_attack").begin();
             it != wb.at("excluded_per_attack").end(); ++it) {
            m.weight_bank.excluded_per_attack[it.key()] = weights_from_json(it.value());
            m.weight_bank.excluded_per_attack_auc[it.key()] = it.value().at("auc");
        }
        m.weight_bank.gradient_cat = weights_from_json(wb.at("gradient_cat"));
        m.weight_bank.distribution_cat = weights_from_json(wb.at("distribution_cat"));
        m.weight_bank.gradient_cat_direct = weights_from_json(wb.at("gradient_cat_direct"));
        m.weight_bank.distribution_cat_direct =
            weights_from_json(wb.at("distribution_cat_direct"));
        m.model_weights.gradient = j.at("model_weights").at("gradient").get<std::vector<double>>();
        m.model_weights.distribution =
            j.at("model_weights").at("distribution").get<std::vector<double>>();
        const auto& th = j.at("thresholds");
        m.thresholds.tau_conf = th.at("tau_conf");
        m.thresholds.tau_disagree = th.at("tau_disagree");
        m.thresholds.tau_anomaly = th.at("tau_anomaly");
        m.thresholds.tau_detect = th.at("tau_detect");
        m.thresholds.conf_scale = th.at("conf_scale");
        m.thresholds.conf_cutoff = th.at("conf_cutoff");
        for (const auto& a : j.at("attacks")) {
            AttackRecord rec;
            rec.spec.kind = attack_from_name(a.at("kind"));
            rec.spec.epsilon = a.at("epsilon");
            rec.spec.steps = a.at("steps");
            rec.spec.step_size = a.at("step_size");
            rec.spec.queries = a.at("queries");
            rec.spec.delta = a.at("delta");
            rec.spec.scale = a.at("scale");
            rec.spec.seed = a.at("seed");
            rec.asr = a.at("asr");
            rec.included_in_weight_learning = a.at("included_in_weight_learning");
            m.attacks.push_back(rec);
        }
        for (const auto& f : j.at("model_files"))
            m.models.push_back(
                model_from_json_string(read_file(fs::path(dir) / f.get<std::string>())));
    } catch (const json::exception& e) {
        throw ConfigError("manifest incomplete: " + std::string(e.what()));
    }
    m.scaler = Scaler::from_json_string(read_file(fs::path(dir) / "scaler.json"));
    if (m.models.size() != 6) throw ConfigError("manifest incomplete: expected 6 models");
    if (!m.thresholds.calibrated())
        throw ConfigError("manifest incomplete: tau_detect not calibrated");
    return m;
}

}  // namespace amds
