#include "amds/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "amds/rng.hpp"
#include "json.hpp"

namespace amds {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

AttackSpec parse_attack(const json& a) {
    reject_unknown(a, {"kind", "epsilon", "steps", "step_size", "queries", "delta", "scale",
                       "binary_search_iters", "kappa"},
                   "attacks[]");
    AttackSpec spec;
    spec.kind = attack_from_name(a.at("kind").get<std::string>());
    spec.epsilon = a.value("epsilon", spec.epsilon);
    spec.steps = a.value("steps", spec.steps);
    spec.step_size = a.value("step_size", spec.step_size);
    spec.queries = a.value("queries", spec.queries);
    spec.delta = a.value("delta", spec.delta);
    spec.scale = a.value("scale", spec.scale);
    spec.binary_search_iters = a.value("binary_search_iters", spec.binary_search_iters);
    spec.kappa = a.value("kappa", spec.kappa);
    spec.validate();
    return spec;
}

}  // namespace

TrainOptions RunConfig::train_options() const {
    TrainOptions opts;
    opts.master_seed = seed;
    opts.attacks = attacks;
    opts.model_gate = model_gate;
    opts.asr_gate = asr_gate;
    opts.target_fpr = target_fpr;
    opts.tune_tau_anomaly = tune_tau_anomaly;
    opts.exclude_below_gate_from_weights = exclude_below_gate;
    opts.attack_sample_count = weight_attack_samples;
    opts.jobs = jobs;
    return opts;
}

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    reject_unknown(j, {"seed", "output_dir", "jobs", "dataset", "split", "gates", "attacks",
                       "weight_learning", "thresholds", "evaluation"},
                   "config root");
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.jobs = j.value("jobs", c.jobs);

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        reject_unknown(d, {"kind", "classes", "dims", "per_class", "separation", "path",
                           "label_column", "seed"},
                       "dataset");
        c.dataset.seed = d.value("seed", c.dataset.seed);
        std::string kind = d.value("kind", "synth");
        if (kind == "synth") {
            c.dataset.synth = true;
            c.dataset.classes = d.value("classes", c.dataset.classes);
            c.dataset.dims = d.value("dims", c.dataset.dims);
            c.dataset.per_class = d.value("per_class", c.dataset.per_class);
            c.dataset.separation = d.value("separation", c.dataset.separation);
        } else if (kind == "csv") {
            c.dataset.synth = false;
            c.dataset.csv_path = d.at("path").get<std::string>();
            c.dataset.label_column = d.at("label_column").get<std::string>();
        } else {
            throw ConfigError("dataset.kind must be 'synth' or 'csv'");
        }
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        reject_unknown(s, {"train", "val", "test"}, "split");
        c.split.train_fraction = s.value("train", c.split.train_fraction);
        c.split.val_fraction = s.value("val", c.split.val_fraction);
        c.split.test_fraction = s.value("test", c.split.test_fraction);
    }
    c.split.seed = c.seed;
    c.split.validate();
    if (j.contains("gates")) {
        const auto& g = j.at("gates");
        reject_unknown(g, {"model_accuracy", "asr"}, "gates");
        c.model_gate = g.value("model_accuracy", c.model_gate);
        c.asr_gate = g.value("asr", c.asr_gate);
    }
    if (j.contains("attacks")) {
        if (!j.at("attacks").is_array()) throw ConfigError("attacks must be an array");
        for (const auto& a : j.at("attacks")) c.attacks.push_back(parse_attack(a));
    }
    if (j.contains("weight_learning")) {
        const auto& w = j.at("weight_learning");
        reject_unknown(w, {"attack_samples", "exclude_below_asr_gate"}, "weight_learning");
        c.weight_attack_samples = w.value("attack_samples", c.weight_attack_samples);
        c.exclude_below_gate = w.value("exclude_below_asr_gate", c.exclude_below_gate);
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        reject_unknown(t, {"target_fpr", "tune_tau_anomaly"}, "thresholds");
        c.target_fpr = t.value("target_fpr", c.target_fpr);
        c.tune_tau_anomaly = t.value("tune_tau_anomaly", c.tune_tau_anomaly);
    }
    if (j.contains("evaluation")) {
        const auto& e = j.at("evaluation");
        reject_unknown(e, {"clean_samples", "attack_samples", "bootstrap_iters", "baselines",
                           "ablations", "adaptive", "scaling", "adaptive_samples",
                           "adaptive_epsilon", "at_epsilon", "at_steps", "scaling_dims",
                           "scaling_epsilon"},
                       "evaluation");
        c.eval.clean_samples = e.value("clean_samples", c.eval.clean_samples);
        c.eval.attack_samples = e.value("attack_samples", c.eval.attack_samples);
        c.eval.bootstrap_iters = e.value("bootstrap_iters", c.eval.bootstrap_iters);
        c.eval.baselines = e.value("baselines", c.eval.baselines);
        c.eval.ablations = e.value("ablations", c.eval.ablations);
        c.eval.adaptive = e.value("adaptive", c.eval.adaptive);
        c.eval.scaling = e.value("scaling", c.eval.scaling);
        c.eval.adaptive_samples = e.value("adaptive_samples", c.eval.adaptive_samples);
        c.eval.adaptive_epsilon = e.value("adaptive_epsilon", c.eval.adaptive_epsilon);
        c.eval.at_epsilon = e.value("at_epsilon", c.eval.at_epsilon);
        c.eval.at_steps = e.value("at_steps", c.eval.at_steps);
        if (e.contains("scaling_dims"))
            c.eval.scaling_dims = e.at("scaling_dims").get<std::vector<int>>();
        c.eval.scaling_epsilon = e.value("scaling_epsilon", c.eval.scaling_epsilon);
    }
    if (c.attacks.empty())
        throw ConfigError("config must list at least one attack");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_json(os.str());
}

PreparedData prepare_data(const RunConfig& config) {
    LabeledDataset raw;
    if (config.dataset.synth) {
        raw = synth_generate(config.dataset.classes, config.dataset.dims,
                             config.dataset.per_class, config.dataset.separation,
                             config.dataset.seed ? config.dataset.seed : config.seed);
    } else {
        raw = load_csv(config.dataset.csv_path, config.dataset.label_column);
    }
    auto [train, val, test] = stratified_split(raw, config.split);
    PreparedData out;
    out.scaler = standardize_fit(train);
    out.train_std = standardize_apply(out.scaler, train);
    out.val_std = standardize_apply(out.scaler, val);
    out.test_std = standardize_apply(out.scaler, test);
    return out;
}

namespace {

std::string matrix_csv(const Matrix& X, const std::vector<std::string>& schema) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t j = 0; j < schema.size(); ++j)
        os << (j ? "," : "") << schema[j];
    os << "\n";
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) os << (j ? "," : "") << X.at(i, j);
        os << "\n";
    }
    return os.str();
}

Matrix matrix_from_csv(const std::string& path, std::size_t expected_cols) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    Matrix X(0, expected_cols);
    std::vector<double> row(expected_cols);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(ls, cell, ',')) {
            if (j >= expected_cols) throw DataError("too many columns in " + path);
            row[j++] = std::stod(cell);
        }
        if (j != expected_cols) throw DataError("short row in " + path);
        X.push_row(row);
    }
    return X;
}

}  // namespace

void save_suite(const EvalSuite& suite, const std::string& dir,
                const std::vector<std::string>& schema,
                const std::vector<AttackRecord>& attack_records) {
    fs::create_directories(dir);
    write_file_atomic((fs::path(dir) / "clean.csv").string(),
                      matrix_csv(suite.clean, schema));
    write_file_atomic((fs::path(dir) / "clean.json").string(),
                      json{{"labels", suite.clean_labels}}.dump(2));
    write_file_atomic((fs::path(dir) / "origin.csv").string(),
                      matrix_csv(suite.attack_origin, schema));
    write_file_atomic((fs::path(dir) / "origin.json").string(),
                      json{{"labels", suite.attack_origin_labels}}.dump(2));
    for (const auto& batch : suite.batches) {
        const auto name = attack_name(batch.kind);
        write_file_atomic((fs::path(dir) / (name + ".csv")).string(),
                          matrix_csv(batch.adv_features, schema));
        json side;
        side["kind"] = name;
        side["asr"] = batch.asr;
        side["origin_indices"] = batch.origin_indices;
        side["labels"] = batch.labels;
        for (const auto& rec : attack_records) {
            if (rec.spec.kind != batch.kind) continue;
            side["params"] = {{"epsilon", rec.spec.epsilon},
                              {"steps", rec.spec.steps},
                              {"step_size", rec.spec.step_size},
                              {"queries", rec.spec.queries},
                              {"delta", rec.spec.delta},
                              {"scale", rec.spec.scale},
                              {"binary_search_iters", rec.spec.binary_search_iters},
                              {"kappa", rec.spec.kappa}};
            side["seed"] = rec.spec.seed;
        }
        write_file_atomic((fs::path(dir) / (name + ".json")).string(), side.dump(2));
    }
}

EvalSuite load_suite(const std::string& dir, const SystemManifest& manifest) {
    auto read_json = [](const fs::path& p) {
        std::ifstream in(p);
        if (!in)
            throw DataError("missing attack batch file " + p.string() +
                            "; run the attack command first");
        return json::parse(in);
    };
    EvalSuite suite;
    const std::size_t d = manifest.feature_count;
    if (!fs::exists(fs::path(dir) / "clean.csv"))
        throw DataError("missing attack batches in " + dir + " (no clean.csv); run the "
                        "attack command first");
    suite.clean = matrix_from_csv((fs::path(dir) / "clean.csv").string(), d);
    suite.clean_labels = read_json(fs::path(dir) / "clean.json")
                             .at("labels").get<std::vector<int>>();
    suite.attack_origin = matrix_from_csv((fs::path(dir) / "origin.csv").string(), d);
    suite.attack_origin_labels = read_json(fs::path(dir) / "origin.json")
                                     .at("labels").get<std::vector<int>>();
    for (const auto& rec : manifest.attacks) {
        const auto name = attack_name(rec.spec.kind);
        fs::path csv = fs::path(dir) / (name + ".csv");
        if (!fs::exists(csv))
            throw DataError("missing attack batch '" + name + "' in " + dir +
                            "; run the attack command first");
        AttackBatch batch;
        batch.kind = rec.spec.kind;
        batch.adv_features = matrix_from_csv(csv.string(), d);
        auto side = read_json(fs::path(dir) / (name + ".json"));
        batch.asr = side.at("asr");
        batch.labels = side.at("labels").get<std::vector<int>>();
        batch.origin_indices = side.at("origin_indices").get<std::vector<std::size_t>>();
        suite.batches.push_back(std::move(batch));
    }
    return suite;
}

Matrix load_feature_csv(const std::string& path, const std::vector<std::string>& schema,
                        const std::string& drop_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file has no header row: " + path);
    std::vector<std::string> header;
    {
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
                cell.pop_back();
            header.push_back(cell);
        }
    }
    // Map each schema column to its position in the file.
    std::vector<std::size_t> pos(schema.size());
    for (std::size_t k = 0; k < schema.size(); ++k) {
        auto it = std::find(header.begin(), header.end(), schema[k]);
        if (it == header.end())
            throw DataError("input CSV is missing feature column '" + schema[k] + "'");
        pos[k] = static_cast<std::size_t>(it - header.begin());
    }
    (void)drop_column;  // ignored columns are simply never read
    Matrix X(0, schema.size());
    std::vector<std::string> cells;
    std::vector<double> row(schema.size());
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        cells.clear();
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < header.size() && line.back() == ',') cells.push_back("");
        if (cells.size() != header.size())
            throw DataError("parse error at row " + std::to_string(row_number) +
                            ": expected " + std::to_string(header.size()) + " fields");
        for (std::size_t k = 0; k < schema.size(); ++k) {
            try {
                row[k] = std::stod(cells[pos[k]]);
            } catch (const std::exception&) {
                throw DataError("non-numeric cell at row " + std::to_string(row_number) +
                                ", column '" + schema[k] + "'");
            }
        }
        X.push_row(row);
    }
    return X;
}

}  // namespace amds
