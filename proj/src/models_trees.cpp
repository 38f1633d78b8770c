#include <algorithm>
#include <numeric>
#include <random>

#include "amds/models.hpp"
#include "amds/rng.hpp"
#include "json.hpp"
#include "trees.hpp"

namespace amds {

using nlohmann::json;

namespace {

json tree_to_json(const trees::Tree& t) {
    json j;
    j["feature"] = t.feature;
    j["threshold"] = t.threshold;
    j["left"] = t.left;
    j["right"] = t.right;
    j["value"] = t.value;
    j["leaf_counts"] = t.leaf_counts;
    return j;
}

trees::Tree tree_from_json(const json& j) {
    trees::Tree t;
    t.feature = j.at("feature").get<std::vector<int>>();
    t.threshold = j.at("threshold").get<std::vector<double>>();
    t.left = j.at("left").get<std::vector<int>>();
    t.right = j.at("right").get<std::vector<int>>();
    t.value = j.at("value").get<std::vector<double>>();
    t.leaf_counts = j.at("leaf_counts").get<std::vector<std::vector<int>>>();
    return t;
}

void check_trainable(const LabeledDataset& train) {
    if (train.class_count < 2) throw DataError("fit: need >= 2 classes");
    if (train.size() == 0) throw DataError("fit: empty training set");
}

std::vector<std::vector<int>> presort_features(const Matrix& X) {
    std::vector<std::vector<int>> sorted_idx(X.cols());
    for (std::size_t f = 0; f < X.cols(); ++f) {
        auto& idx = sorted_idx[f];
        idx.resize(X.rows());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            double va = X.at(a, f), vb = X.at(b, f);
            return va < vb || (va == vb && a < b);
        });
    }
    return sorted_idx;
}

}  // namespace

class DecisionTreeModel : public Model {
public:
    DecisionTreeModel(const ClassifierSpec& spec, const LabeledDataset& train) {
        check_trainable(train);
        d_ = train.dims();
        classes_ = train.class_count;
        seed_ = spec.seed;
        std::vector<int> w(train.size(), 1);
        trees::ClassTreeParams params;  // depth 10
        auto rng = make_rng(spec.seed);
        tree_ = trees::fit_classification_tree(train.features, train.labels, classes_, w,
                                               params, rng);
    }
    explicit DecisionTreeModel(const json& j)
        : d_(j.at("features")), classes_(j.at("classes")), seed_(j.at("seed")),
          tree_(tree_from_json(j.at("tree"))) {}

    Paradigm paradigm() const override { return Paradigm::decision_tree; }
    std::size_t feature_count() const override { return d_; }
    std::size_t class_count() const override { return classes_; }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        check_width(x);
        return trees::leaf_distribution(tree_, tree_.walk(x), classes_);
    }

    std::string to_json_string() const override {
        json j;
        j["format_version"] = 1;
        j["paradigm"] = paradigm_name(paradigm());
        j["features"] = d_;
        j["classes"] = classes_;
        j["seed"] = seed_;
        j["tree"] = tree_to_json(tree_);
        return j.dump();
    }

private:
    std::size_t d_;
    int classes_;
    std::uint64_t seed_;
    trees::Tree tree_;
};

class RandomForestModel : public Model {
public:
    static constexpr int kTrees = 100;

    RandomForestModel(const ClassifierSpec& spec, const LabeledDataset& train) {
        check_trainable(train);
        d_ = train.dims();
        classes_ = train.class_count;
        seed_ = spec.seed;
        trees::ClassTreeParams params;
        params.max_depth = 32;
        params.features_per_split =
            std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d_))));
        forest_.reserve(kTrees);
        const std::size_t n = train.size();
        for (int t = 0; t < kTrees; ++t) {
            auto rng = make_rng(component_seed(spec.seed, "rf_tree", t));
            std::vector<int> w(n, 0);
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (std::size_t i = 0; i < n; ++i) w[pick(rng)]++;
            forest_.push_back(trees::fit_classification_tree(train.features, train.labels,
                                                             classes_, w, params, rng));
        }
    }
    explicit RandomForestModel(const json& j)
        : d_(j.at("features")), classes_(j.at("classes")), seed_(j.at("seed")) {
        for (const auto& tj : j.at("trees")) forest_.push_back(tree_from_json(tj));
    }

    Paradigm paradigm() const override { return Paradigm::random_forest; }
    std::size_t feature_count() const override { return d_; }
    std::size_t class_count() const override { return classes_; }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        check_width(x);
        std::vector<double> acc(classes_, 0.0);
        for (const auto& t : forest_) {
            auto dist = trees::leaf_distribution(t, t.walk(x), classes_);
            for (int c = 0; c < classes_; ++c) acc[c] += dist[c];
        }
        for (double& v : acc) v /= static_cast<double>(forest_.size());
        return acc;
    }

    std::string to_json_string() const override {
        json j;
        j["format_version"] = 1;
        j["paradigm"] = paradigm_name(paradigm());
        j["features"] = d_;
        j["classes"] = classes_;
        j["seed"] = seed_;
        json arr = json::array();
        for (const auto& t : forest_) arr.push_back(tree_to_json(t));
        j["trees"] = std::move(arr);
        return j.dump();
    }

private:
    std::size_t d_;
    int classes_;
    std::uint64_t seed_;
    std::vector<trees::Tree> forest_;
};

/// Multiclass softmax boosting, one regression tree per class per round.
class GradientBoostedModel : public Model {
public:
    static constexpr int kRounds = 100;
    static constexpr double kLearningRate = 0.1;

    GradientBoostedModel(const ClassifierSpec& spec, const LabeledDataset& train,
                         bool leaf_wise) {
        check_trainable(train);
        d_ = train.dims();
        classes_ = train.class_count;
        seed_ = spec.seed;
        leaf_wise_ = leaf_wise;

        const std::size_t n = train.size();
        auto sorted_idx = presort_features(train.features);
        trees::RegTreeParams params;
        params.leaf_wise = leaf_wise;

        Matrix scores(n, classes_, 0.0);
        std::vector<double> grad(n), hess(n);
        rounds_.reserve(kRounds);
        for (int round = 0; round < kRounds; ++round) {
            std::vector<trees::Tree> per_class;
            per_class.reserve(classes_);
            for (int c = 0; c < classes_; ++c) {
                for (std::size_t i = 0; i < n; ++i) {
                    auto p = softmax(scores.row(i));
                    double y = train.labels[i] == c ? 1.0 : 0.0;
                    grad[i] = p[c] - y;
                    hess[i] = std::max(p[c] * (1.0 - p[c]), 1e-6);
                }
                per_class.push_back(trees::fit_regression_tree(train.features, grad, hess,
                                                               sorted_idx, params));
                const auto& t = per_class.back();
                for (std::size_t i = 0; i < n; ++i)
                    scores.at(i, c) += kLearningRate * t.value[t.walk(train.features.row(i))];
            }
            rounds_.push_back(std::move(per_class));
        }
    }
    GradientBoostedModel(const json& j, bool leaf_wise)
        : d_(j.at("features")), classes_(j.at("classes")), seed_(j.at("seed")),
          leaf_wise_(leaf_wise) {
        for (const auto& rj : j.at("rounds")) {
            std::vector<trees::Tree> per_class;
            for (const auto& tj : rj) per_class.push_back(tree_from_json(tj));
            rounds_.push_back(std::move(per_class));
        }
    }

    Paradigm paradigm() const override {
        return leaf_wise_ ? Paradigm::boosted_trees_b : Paradigm::boosted_trees_a;
    }
    std::size_t feature_count() const override { return d_; }
    std::size_t class_count() const override { return classes_; }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        check_width(x);
        std::vector<double> score(classes_, 0.0);
        for (const auto& per_class : rounds_)
            for (int c = 0; c < classes_; ++c) {
                const auto& t = per_class[c];
                score[c] += kLearningRate * t.value[t.walk(x)];
            }
        return softmax(score);
    }

    std::string to_json_string() const override {
        json j;
        j["format_version"] = 1;
        j["paradigm"] = paradigm_name(paradigm());
        j["features"] = d_;
        j["classes"] = classes_;
        j["seed"] = seed_;
        json rounds = json::array();
        for (const auto& per_class : rounds_) {
            json rj = json::array();
            for (const auto& t : per_class) rj.push_back(tree_to_json(t));
            rounds.push_back(std::move(rj));
        }
        j["rounds"] = std::move(rounds);
        return j.dump();
    }

private:
    std::size_t d_;
    int classes_;
    std::uint64_t seed_;
    bool leaf_wise_;
    std::vector<std::vector<trees::Tree>> rounds_;
};

std::unique_ptr<Model> make_decision_tree(const ClassifierSpec& s, const LabeledDataset& d) {
    return std::make_unique<DecisionTreeModel>(s, d);
}
std::unique_ptr<Model> make_random_forest(const ClassifierSpec& s, const LabeledDataset& d) {
    return std::make_unique<RandomForestModel>(s, d);
}
std::unique_ptr<Model> make_boosted(const ClassifierSpec& s, const LabeledDataset& d,
                                    bool leaf_wise) {
    return std::make_unique<GradientBoostedModel>(s, d, leaf_wise);
}
std::unique_ptr<Model> tree_model_from_json(const json& j) {
    std::string p = j.at("paradigm");
    if (p == "decision_tree") return std::make_unique<DecisionTreeModel>(j);
    if (p == "random_forest") return std::make_unique<RandomForestModel>(j);
    if (p == "boosted_trees_a") return std::make_unique<GradientBoostedModel>(j, false);
    if (p == "boosted_trees_b") return std::make_unique<GradientBoostedModel>(j, true);
    throw DataError("unknown tree paradigm: " + p);
}

}  // namespace amds
