#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "amds/config.hpp"
#include "amds/eval.hpp"
#include "amds/pipeline.hpp"
#include "amds/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace amds;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string manifest_dir;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig config = load_config(args.config_path);
    if (const char* env = std::getenv("AMDS_OUTPUT_DIR")) config.output_dir = env;
    if (!args.output_dir.empty()) config.output_dir = args.output_dir;
    if (args.seed_set) {
        config.seed = args.seed;
        config.split.seed = args.seed;
    }
    if (args.jobs > 0) config.jobs = args.jobs;
    return config;
}

std::string manifest_dir_for(const RunConfig& config, const CommonArgs& args) {
    if (!args.manifest_dir.empty()) return args.manifest_dir;
    return (fs::path(config.output_dir) / "manifest").string();
}

void write_table(const RunConfig& config, const std::string& name, const json& table) {
    auto path = fs::path(config.output_dir) / "reports" / name;
    write_file_atomic(path.string(), table.dump(2) + "\n");
    std::cerr << "wrote " << path.string() << "\n";
}

double default_attack_epsilon(const RunConfig& config) {
    for (const auto& a : config.attacks)
        if (a.kind == AttackKind::fgsm) return a.epsilon;
    return config.attacks.front().epsilon;
}

int cmd_train(const CommonArgs& args) {
    auto config = resolve_config(args);
    auto data = prepare_data(config);
    auto manifest = train(config.train_options(), data.train_std, data.val_std, data.scaler);
    auto dir = manifest_dir_for(config, args);
    save_manifest(manifest, dir);
    std::cerr << "manifest written to " << dir << "\n";
    json summary;
    summary["manifest_dir"] = dir;
    summary["dataset_fingerprint"] = manifest.dataset_fingerprint;
    summary["model_val_accuracy"] = manifest.model_val_accuracy;
    json asr = json::object();
    for (const auto& rec : manifest.attacks) asr[attack_name(rec.spec.kind)] = rec.asr;
    summary["attack_asr"] = asr;
    summary["tau_detect"] = manifest.thresholds.tau_detect;
    write_file_atomic((fs::path(config.output_dir) / "train_summary.json").string(),
                      summary.dump(2) + "\n");
    return 0;
}

int cmd_attack(const CommonArgs& args) {
    auto config = resolve_config(args);
    auto manifest = load_manifest(manifest_dir_for(config, args));
    auto data = prepare_data(config);
    auto suite = build_eval_suite(manifest, data.test_std, config.eval.clean_samples,
                                  config.eval.attack_samples, config.seed);
    save_suite(suite, (fs::path(config.output_dir) / "attacks").string(),
               manifest.scaler.schema, manifest.attacks);
    std::cerr << "attack batches written to " << config.output_dir << "/attacks\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    auto config = resolve_config(args);
    auto manifest = load_manifest(manifest_dir_for(config, args));
    auto data = prepare_data(config);
    auto suite = load_suite((fs::path(config.output_dir) / "attacks").string(), manifest);

    std::vector<std::pair<std::string, json>> tables;
    auto t1 = table1_weights(manifest);
    write_table(config, "table1_weights.json", t1);
    tables.push_back({"Table 1: attack-specific learned weights", t1});

    auto t2 = table2_twostage(manifest, data.val_std, suite);
    write_table(config, "table2_twostage.json", t2);
    tables.push_back({"Table 2: detection strategy comparison (AUC)", t2});

    auto t3 = table3_cascade(manifest, suite);
    json t3_timing = t3["timing"];
    t3.erase("timing");  // machine-dependent values live in the sidecar
    write_table(config, "table3_cascade.json", t3);
    write_table(config, "table3_cascade_timing.json", t3_timing);
    tables.push_back({"Table 3: cascade router performance", t3});
    tables.push_back({"Table 3 timing (machine-dependent)", t3_timing});

    auto cat = category_inference_report(manifest, suite);
    write_table(config, "category_inference.json", cat);
    tables.push_back({"Category inference", cat});

    if (config.eval.baselines) {
        double at_eps = config.eval.at_epsilon > 0 ? config.eval.at_epsilon
                                                   : default_attack_epsilon(config);
        auto t4 = table4_baselines(manifest, data.train_std, data.val_std, suite, at_eps,
                                   config.eval.at_steps, config.eval.bootstrap_iters,
                                   config.seed);
        write_table(config, "table4_baselines.json", t4);
        tables.push_back({"Table 4: baseline comparison", t4});
    }
    if (config.eval.ablations) {
        auto t5 = table5_ablation(manifest, suite);
        write_table(config, "table5_ablation.json", t5);
        tables.push_back({"Table 5: ablation study", t5});
    }
    if (config.eval.scaling) {
        auto t6 = table6_scaling(config.eval.scaling_dims, config.eval.scaling_epsilon,
                                 config.seed);
        write_table(config, "table6_scaling.json", t6);
        tables.push_back({"Table 6: dimensionality scaling", t6});
    }
    if (config.eval.adaptive) {
        double eps = config.eval.adaptive_epsilon > 0 ? config.eval.adaptive_epsilon
                                                      : default_attack_epsilon(config);
        auto t7 = table7_adaptive(manifest, suite, eps, config.eval.adaptive_samples,
                                  config.seed);
        write_table(config, "table7_adaptive.json", t7);
        tables.push_back({"Table 7: adaptive adversaries", t7});
    }
    write_file_atomic((fs::path(config.output_dir) / "reports" / "report.txt").string(),
                      render_report_text(tables));
    return 0;
}

int cmd_infer(const CommonArgs& args, const std::string& input, const std::string& output,
              const std::string& label_column) {
    RunConfig config;  // manifest-only command; config optional
    if (!args.config_path.empty()) config = resolve_config(args);
    std::string dir = args.manifest_dir.empty()
                          ? (fs::path(config.output_dir) / "manifest").string()
                          : args.manifest_dir;
    auto manifest = load_manifest(dir);
    auto raw = load_feature_csv(input, manifest.scaler.schema, label_column);
    Matrix X(raw.rows(), raw.cols());
    for (std::size_t i = 0; i < raw.rows(); ++i)
        for (std::size_t j = 0; j < raw.cols(); ++j)
            X.at(i, j) =
                (raw.at(i, j) - manifest.scaler.means[j]) / manifest.scaler.stds[j];
    auto [results, stats] = infer_batch(X, manifest);
    std::ostringstream os;
    for (const auto& r : results) {
        json line;
        line["y_detect"] = r.y_detect;
        line["y_class"] = r.y_class;
        line["conf_detect"] = r.confidence_detect;
        line["conf_class"] = r.confidence_class;
        line["category"] = category_name(r.inferred_category);
        line["stage"] = r.cascade_stage;
        os << line.dump() << "\n";
    }
    if (output.empty() || output == "-") {
        std::cout << os.str();
    } else {
        write_file_atomic(output, os.str());
    }
    std::cerr << "processed " << results.size() << " rows ("
              << stats.ms_per_sample << " ms/sample)\n";
    return 0;
}

int cmd_ablate(const CommonArgs& args) {
    auto config = resolve_config(args);
    auto manifest = load_manifest(manifest_dir_for(config, args));
    auto suite = load_suite((fs::path(config.output_dir) / "attacks").string(), manifest);
    auto t5 = table5_ablation(manifest, suite);
    write_table(config, "table5_ablation.json", t5);
    std::cout << render_report_text({{"Table 5: ablation study", t5}});
    return 0;
}

int cmd_adaptive(const CommonArgs& args) {
    auto config = resolve_config(args);
    auto manifest = load_manifest(manifest_dir_for(config, args));
    auto suite = load_suite((fs::path(config.output_dir) / "attacks").string(), manifest);
    double eps = config.eval.adaptive_epsilon > 0 ? config.eval.adaptive_epsilon
                                                  : default_attack_epsilon(config);
    auto t7 = table7_adaptive(manifest, suite, eps, config.eval.adaptive_samples,
                              config.seed);
    write_table(config, "table7_adaptive.json", t7);
    std::cout << render_report_text({{"Table 7: adaptive adversaries", t7}});
    return 0;
}

int cmd_scaling(const CommonArgs& args) {
    auto config = resolve_config(args);
    auto t6 = table6_scaling(config.eval.scaling_dims, config.eval.scaling_epsilon,
                             config.seed);
    write_table(config, "table6_scaling.json", t6);
    std::cout << render_report_text({{"Table 6: dimensionality scaling", t6}});
    return 0;
}

int cmd_report(const CommonArgs& args) {
    auto config = resolve_config(args);
    std::vector<std::pair<std::string, json>> tables;
    auto dir = fs::path(config.output_dir) / "reports";
    if (!fs::exists(dir)) throw DataError("no reports in " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        tables.push_back({entry.path().filename().string(), json::parse(in)});
    }
    std::sort(tables.begin(), tables.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    auto text = render_report_text(tables);
    write_file_atomic((dir / "report.txt").string(), text);
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AMDS: attack-aware multi-stage defense for network intrusion detection"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string infer_input, infer_output = "-", infer_label;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", args.config_path, "experiment config JSON");
        if (needs_config) opt->required();
        cmd->add_option("--manifest", args.manifest_dir, "manifest directory");
        cmd->add_option("--output-dir", args.output_dir, "output directory override");
        cmd->add_option("--seed", args.seed, "master seed override")
            ->each([&](const std::string&) { args.seed_set = true; });
        cmd->add_option("--jobs", args.jobs, "worker cap");
    };

    add_common(app.add_subcommand("train", "run the training pipeline"), true);
    add_common(app.add_subcommand("attack", "generate held-out attack batches"), true);
    add_common(app.add_subcommand("evaluate", "run the evaluation harness"), true);
    auto* infer_cmd = app.add_subcommand("infer", "score a CSV of flow features");
    add_common(infer_cmd, false);
    infer_cmd->add_option("--input", infer_input, "input CSV")->required();
    infer_cmd->add_option("--output", infer_output, "output JSON-lines path ('-' = stdout)");
    infer_cmd->add_option("--label-column", infer_label, "label column to ignore");
    add_common(app.add_subcommand("ablate", "run the ablation study"), true);
    add_common(app.add_subcommand("adaptive", "run the adaptive-adversary study"), true);
    add_common(app.add_subcommand("scaling", "run the dimensionality study"), true);
    add_common(app.add_subcommand("report", "re-render the text report"), true);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("train")) return cmd_train(args);
        if (app.got_subcommand("attack")) return cmd_attack(args);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(args);
        if (app.got_subcommand("infer"))
            return cmd_infer(args, infer_input, infer_output, infer_label);
        if (app.got_subcommand("ablate")) return cmd_ablate(args);
        if (app.got_subcommand("adaptive")) return cmd_adaptive(args);
        if (app.got_subcommand("scaling")) return cmd_scaling(args);
        if (app.got_subcommand("report")) return cmd_report(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        json err = {{"error", {{"type", "config"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        json err = {{"error", {{"type", "config"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const GateError& e) {
        json err = {{"error", {{"type", "gate"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 4;
    } catch (const DataError& e) {
        json err = {{"error", {{"type", "data"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        json err = {{"error", {{"type", "internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
