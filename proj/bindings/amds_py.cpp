#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "amds/config.hpp"
#include "amds/eval.hpp"
#include "amds/pipeline.hpp"

namespace py = pybind11;
using namespace amds;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(0, rows[0].size());
    for (const auto& r : rows) m.push_row(r);
    return m;
}

py::dict dual_output_dict(const DualOutput& out) {
    py::dict d;
    d["y_detect"] = out.y_detect;
    d["y_class"] = out.y_class;
    d["conf_detect"] = out.confidence_detect;
    d["conf_class"] = out.confidence_class;
    d["category"] = category_name(out.inferred_category);
    d["stage"] = out.cascade_stage;
    return d;
}

}  // namespace

PYBIND11_MODULE(_amds, m) {
    m.doc() = "Attack-aware multi-stage defense for network intrusion detection";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<GateError>(m, "GateError");

    m.def("entropy",
          [](const std::vector<double>& p) { return entropy(p); },
          py::arg("ens_prob"), "Shannon entropy (nats) of an ensemble distribution");
    m.def("disagreement",
          [](const std::vector<std::vector<double>>& rows) {
              return disagreement(matrix_from_rows(rows));
          },
          py::arg("prob_matrix"), "Average per-class variance over the six member rows");
    m.def("auc",
          [](const std::vector<double>& clean, const std::vector<double>& adv) {
              return auc(clean, adv);
          },
          py::arg("clean_scores"), py::arg("adv_scores"),
          "Mann-Whitney AUC with ties worth one half");
    m.def("ads",
          [](double entropy_n, double disagreement_n, double anomaly_n, double alpha,
             double beta, double gamma) {
              SignalVector s;
              s.entropy_n = entropy_n;
              s.disagreement_n = disagreement_n;
              s.anomaly_n = anomaly_n;
              return ads(s, {alpha, beta, gamma});
          },
          py::arg("entropy_n"), py::arg("disagreement_n"), py::arg("anomaly_n"),
          py::arg("alpha"), py::arg("beta"), py::arg("gamma"));
    m.def("category_confidence", &category_confidence, py::arg("anomaly_n"),
          py::arg("tau_anomaly") = 0.50);
    m.def("model_category_weights",
          [](const std::vector<double>& acc) { return model_category_weights(acc); },
          py::arg("accuracies"));
    m.def("blend",
          [](const std::vector<double>& v, double conf) { return blend(v, conf); },
          py::arg("v_category"), py::arg("conf"));

    m.def("synth_generate",
          [](int classes, int dims, int per_class, double separation, std::uint64_t seed) {
              auto ds = synth_generate(classes, dims, per_class, separation, seed);
              py::dict d;
              std::vector<std::vector<double>> rows(ds.size());
              for (std::size_t i = 0; i < ds.size(); ++i) {
                  auto r = ds.features.row(i);
                  rows[i].assign(r.begin(), r.end());
              }
              d["features"] = rows;
              d["labels"] = ds.labels;
              d["class_count"] = ds.class_count;
              return d;
          },
          py::arg("classes"), py::arg("dims"), py::arg("per_class"), py::arg("separation"),
          py::arg("seed"));

    m.def("train_from_config",
          [](const std::string& config_json, const std::string& manifest_dir) {
              auto config = parse_config_json(config_json);
              auto data = prepare_data(config);
              auto manifest =
                  train(config.train_options(), data.train_std, data.val_std, data.scaler);
              save_manifest(manifest, manifest_dir);
              py::dict d;
              d["manifest_dir"] = manifest_dir;
              d["tau_detect"] = manifest.thresholds.tau_detect;
              d["model_val_accuracy"] = manifest.model_val_accuracy;
              py::dict asr;
              for (const auto& rec : manifest.attacks)
                  asr[attack_name(rec.spec.kind).c_str()] = rec.asr;
              d["attack_asr"] = asr;
              return d;
          },
          py::arg("config_json"), py::arg("manifest_dir"),
          "Run the full training pipeline from a config JSON string");

    py::class_<SystemManifest>(m, "Manifest")
        .def_static("load", [](const std::string& dir) { return load_manifest(dir); })
        .def_property_readonly("class_count",
                               [](const SystemManifest& mf) { return mf.class_count; })
        .def_property_readonly("feature_count",
                               [](const SystemManifest& mf) { return mf.feature_count; })
        .def_property_readonly("tau_detect",
                               [](const SystemManifest& mf) {
                                   return mf.thresholds.tau_detect;
                               })
        .def("infer",
             [](const SystemManifest& mf, const std::vector<double>& x) {
                 return dual_output_dict(infer(x, mf));
             },
             py::arg("x"), "Dual-output inference on one standardized sample")
        .def("infer_batch",
             [](const SystemManifest& mf, const std::vector<std::vector<double>>& rows) {
                 auto [results, stats] = infer_batch(matrix_from_rows(rows), mf);
                 py::list out;
                 for (const auto& r : results) out.append(dual_output_dict(r));
                 py::dict instrumentation;
                 instrumentation["stage1"] = stats.counters.stage1_fast_path;
                 instrumentation["stage2"] = stats.counters.stage2_entered;
                 instrumentation["stage3"] = stats.counters.stage3_entered;
                 instrumentation["mahalanobis"] = stats.counters.mahalanobis_evals;
                 instrumentation["ms_per_sample"] = stats.ms_per_sample;
                 return py::make_tuple(out, instrumentation);
             },
             py::arg("rows"))
        .def("signals",
             [](const SystemManifest& mf, const std::vector<double>& x) {
                 auto s = normalized_signals(mf, x);
                 py::dict d;
                 d["entropy"] = s.entropy;
                 d["disagreement"] = s.disagreement;
                 d["anomaly"] = s.anomaly;
                 d["entropy_n"] = s.entropy_n;
                 d["disagreement_n"] = s.disagreement_n;
                 d["anomaly_n"] = s.anomaly_n;
                 return d;
             },
             py::arg("x"));
}
