#include <cmath>
#include <iostream>

#include "amds/models.hpp"
#include "json.hpp"

namespace amds {

using nlohmann::json;

/// Multinomial logistic regression with L2 penalty (C = 1.0, scikit-style
/// objective: mean cross-entropy + ||W||^2 / (2 C n)). Full-batch gradient
/// descent with a backtracking step size; deterministic from zero init.
class LogisticRegressionModel : public Model {
public:
    static constexpr double kRegC = 1.0;
    static constexpr int kMaxIters = 500;

    LogisticRegressionModel(const ClassifierSpec& spec, const LabeledDataset& train) {
        if (train.class_count < 2) throw DataError("fit: need >= 2 classes");
        if (train.size() == 0) throw DataError("fit: empty training set");
        d_ = train.dims();
        classes_ = train.class_count;
        seed_ = spec.seed;
        weights_ = Matrix(classes_, d_, 0.0);
        bias_.assign(classes_, 0.0);

        const std::size_t n = train.size();
        const double reg = 1.0 / (kRegC * static_cast<double>(n));
        Matrix grad_w(classes_, d_);
        std::vector<double> grad_b(classes_);
        double lr = 1.0;
        double loss = compute_loss_grad(train, reg, grad_w, grad_b);
        int iter = 0;
        for (; iter < kMaxIters; ++iter) {
            double gmax = linf_norm(grad_b);
            gmax = std::max(gmax, linf_norm(grad_w.data()));
            if (gmax < 1e-7) break;
            Matrix w_bak = weights_;
            auto b_bak = bias_;
            bool accepted = false;
            for (int back = 0; back < 40; ++back) {
                for (std::size_t i = 0; i < weights_.data().size(); ++i)
                    weights_.data()[i] = w_bak.data()[i] - lr * grad_w.data()[i];
                for (int c = 0; c < classes_; ++c) bias_[c] = b_bak[c] - lr * grad_b[c];
                Matrix next_gw(classes_, d_);
                std::vector<double> next_gb(classes_);
                double next_loss = compute_loss_grad(train, reg, next_gw, next_gb);
                if (next_loss <= loss + 1e-15) {
                    loss = next_loss;
                    grad_w = std::move(next_gw);
                    grad_b = std::move(next_gb);
                    lr *= 1.2;
                    accepted = true;
                    break;
                }
                lr *= 0.5;
            }
            if (!accepted) break;
        }
        if (iter == kMaxIters)
            std::cerr << "warning: logistic regression did not converge after " << kMaxIters
                      << " iterations, final loss " << loss << "\n";
    }

    explicit LogisticRegressionModel(const json& j)
        : d_(j.at("features")), classes_(j.at("classes")), seed_(j.at("seed")) {
        weights_ = Matrix(classes_, d_);
        weights_.data() = j.at("weights").get<std::vector<double>>();
        bias_ = j.at("bias").get<std::vector<double>>();
    }

    Paradigm paradigm() const override { return Paradigm::logistic_regression; }
    std::size_t feature_count() const override { return d_; }
    std::size_t class_count() const override { return classes_; }
    bool differentiable() const override { return true; }

    std::vector<double> logits(std::span<const double> x) const override {
        check_width(x);
        std::vector<double> z(classes_);
        for (int c = 0; c < classes_; ++c) z[c] = dot(weights_.row(c), x) + bias_[c];
        return z;
    }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        return softmax(logits(x));
    }

    std::vector<double> input_gradient(std::span<const double> x,
                                       int target_class) const override {
        auto p = predict_proba(x);
        p[target_class] -= 1.0;
        return logit_combination_gradient(x, p);
    }

    std::vector<double> logit_combination_gradient(
        std::span<const double> x, std::span<const double> coeffs) const override {
        check_width(x);
        std::vector<double> g(d_, 0.0);
        for (int c = 0; c < classes_; ++c)
            for (std::size_t j = 0; j < d_; ++j) g[j] += coeffs[c] * weights_.at(c, j);
        return g;
    }

    std::string to_json_string() const override {
        json j;
        j["format_version"] = 1;
        j["paradigm"] = paradigm_name(paradigm());
        j["features"] = d_;
        j["classes"] = classes_;
        j["seed"] = seed_;
        j["weights"] = weights_.data();
        j["bias"] = bias_;
        return j.dump();
    }

private:
    double compute_loss_grad(const LabeledDataset& train, double reg, Matrix& grad_w,
                             std::vector<double>& grad_b) const {
        const std::size_t n = train.size();
        std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        double loss = 0.0;
        std::vector<double> z(classes_);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = train.features.row(i);
            for (int c = 0; c < classes_; ++c) z[c] = dot(weights_.row(c), x) + bias_[c];
            auto p = softmax(z);
            loss -= std::log(std::max(p[train.labels[i]], 1e-300));
            for (int c = 0; c < classes_; ++c) {
                double delta = p[c] - (train.labels[i] == c ? 1.0 : 0.0);
                grad_b[c] += delta;
                for (std::size_t j = 0; j < d_; ++j) grad_w.at(c, j) += delta * x[j];
            }
        }
        loss /= static_cast<double>(n);
        for (auto& g : grad_w.data()) g /= static_cast<double>(n);
        for (auto& g : grad_b) g /= static_cast<double>(n);
        double wnorm2 = 0.0;
        for (std::size_t i = 0; i < weights_.data().size(); ++i) {
            wnorm2 += weights_.data()[i] * weights_.data()[i];
            grad_w.data()[i] += reg * weights_.data()[i];
        }
        return loss + 0.5 * reg * wnorm2;
    }

    std::size_t d_;
    int classes_;
    std::uint64_t seed_;
    Matrix weights_;  // C x d
    std::vector<double> bias_;
};

std::unique_ptr<Model> make_logistic(const ClassifierSpec& s, const LabeledDataset& d) {
    return std::make_unique<LogisticRegressionModel>(s, d);
}
std::unique_ptr<Model> logistic_from_json(const json& j) {
    return std::make_unique<LogisticRegressionModel>(j);
}

}  // namespace amds
