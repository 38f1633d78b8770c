#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

#include "amds/models.hpp"
#include "amds/rng.hpp"
#include "json.hpp"

namespace amds {

using nlohmann::json;

/// Two hidden layers (100, 50) with ReLU and softmax output. Mini-batch
/// SGD with momentum, batch 64, up to 200 epochs, stepped learning-rate
/// schedule. At ReLU kinks the one-sided subgradient relu'(0) = 0 is used.
class MlpModel : public Model {
public:
    static constexpr int kHidden1 = 100;
    static constexpr int kHidden2 = 50;
    static constexpr int kBatch = 64;
    static constexpr int kMaxEpochs = 200;

    MlpModel(const ClassifierSpec& spec, const LabeledDataset& train) {
        if (train.class_count < 2) throw DataError("fit: need >= 2 classes");
        if (train.size() == 0) throw DataError("fit: empty training set");
        d_ = train.dims();
        classes_ = train.class_count;
        seed_ = spec.seed;
        auto rng = make_rng(spec.seed);
        init_layer(w1_, b1_, kHidden1, d_, rng);
        init_layer(w2_, b2_, kHidden2, kHidden1, rng);
        init_layer(w3_, b3_, classes_, kHidden2, rng);

        const std::size_t n = train.size();
        Grads g(d_, classes_), vel(d_, classes_);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        const double momentum = 0.9;
        double final_loss = 0.0;
        for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
            double lr = 0.05 * std::pow(0.9, epoch / 20);
            std::shuffle(order.begin(), order.end(), rng);
            double epoch_loss = 0.0;
            for (std::size_t start = 0; start < n; start += kBatch) {
                std::size_t end = std::min(start + kBatch, n);
                g.zero();
                for (std::size_t k = start; k < end; ++k) {
                    std::size_t i = order[k];
                    epoch_loss += backprop(train.features.row(i), train.labels[i], g);
                }
                double scale = 1.0 / static_cast<double>(end - start);
                vel.axpy_into(momentum, g, scale);
                apply_update(vel, lr);
            }
            final_loss = epoch_loss / static_cast<double>(n);
            if (final_loss < 1e-5) break;
        }
        if (final_loss > 1e-2)
            std::cerr << "warning: MLP training stopped with loss " << final_loss << "\n";
    }

    explicit MlpModel(const json& j)
        : d_(j.at("features")), classes_(j.at("classes")), seed_(j.at("seed")) {
        auto load = [&](const char* key, Matrix& w, std::vector<double>& b, std::size_t rows,
                        std::size_t cols) {
            w = Matrix(rows, cols);
            w.data() = j.at(key).at("w").get<std::vector<double>>();
            b = j.at(key).at("b").get<std::vector<double>>();
        };
        load("layer1", w1_, b1_, kHidden1, d_);
        load("layer2", w2_, b2_, kHidden2, kHidden1);
        load("layer3", w3_, b3_, classes_, kHidden2);
    }

    Paradigm paradigm() const override { return Paradigm::mlp; }
    std::size_t feature_count() const override { return d_; }
    std::size_t class_count() const override { return classes_; }
    bool differentiable() const override { return true; }

    std::vector<double> logits(std::span<const double> x) const override {
        check_width(x);
        std::vector<double> a1, a2;
        return forward(x, a1, a2);
    }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        return softmax(logits(x));
    }

    std::vector<double> input_gradient(std::span<const double> x,
                                       int target_class) const override {
        check_width(x);
        std::vector<double> a1, a2;
        auto z = forward(x, a1, a2);
        auto delta = softmax(z);
        delta[target_class] -= 1.0;
        return backprop_to_input(delta, a1, a2);
    }

    std::vector<double> logit_combination_gradient(
        std::span<const double> x, std::span<const double> coeffs) const override {
        check_width(x);
        std::vector<double> a1, a2;
        forward(x, a1, a2);
        std::vector<double> delta(coeffs.begin(), coeffs.end());
        return backprop_to_input(delta, a1, a2);
    }

    std::string to_json_string() const override {
        json j;
        j["format_version"] = 1;
        j["paradigm"] = paradigm_name(paradigm());
        j["features"] = d_;
        j["classes"] = classes_;
        j["seed"] = seed_;
        j["layer1"] = {{"w", w1_.data()}, {"b", b1_}};
        j["layer2"] = {{"w", w2_.data()}, {"b", b2_}};
        j["layer3"] = {{"w", w3_.data()}, {"b", b3_}};
        return j.dump();
    }

private:
    struct Grads {
        Matrix w1, w2, w3;
        std::vector<double> b1, b2, b3;
        Grads(std::size_t d, int classes)
            : w1(kHidden1, d), w2(kHidden2, kHidden1), w3(classes, kHidden2),
              b1(kHidden1, 0.0), b2(kHidden2, 0.0), b3(classes, 0.0) {}
        void zero() {
            std::fill(w1.data().begin(), w1.data().end(), 0.0);
            std::fill(w2.data().begin(), w2.data().end(), 0.0);
            std::fill(w3.data().begin(), w3.data().end(), 0.0);
            std::fill(b1.begin(), b1.end(), 0.0);
            std::fill(b2.begin(), b2.end(), 0.0);
            std::fill(b3.begin(), b3.end(), 0.0);
        }
        // vel = momentum * vel + scale * g
        void axpy_into(double momentum, const Grads& g, double scale) {
            auto upd = [&](std::vector<double>& v, const std::vector<double>& gv) {
                for (std::size_t i = 0; i < v.size(); ++i)
                    v[i] = momentum * v[i] + scale * gv[i];
            };
            upd(w1.data(), g.w1.data());
            upd(w2.data(), g.w2.data());
            upd(w3.data(), g.w3.data());
            upd(b1, g.b1);
            upd(b2, g.b2);
            upd(b3, g.b3);
        }
    };

    static void init_layer(Matrix& w, std::vector<double>& b, std::size_t rows,
                           std::size_t cols, std::mt19937_64& rng) {
        w = Matrix(rows, cols);
        b.assign(rows, 0.0);
        std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(cols)));
        for (auto& v : w.data()) v = he(rng);
    }

    static void affine(const Matrix& w, const std::vector<double>& b,
                       std::span<const double> in, std::vector<double>& out) {
        out.resize(w.rows());
        for (std::size_t r = 0; r < w.rows(); ++r) out[r] = dot(w.row(r), in) + b[r];
    }

    std::vector<double> forward(std::span<const double> x, std::vector<double>& a1,
                                std::vector<double>& a2) const {
        affine(w1_, b1_, x, a1);
        for (double& v : a1) v = v > 0.0 ? v : 0.0;
        affine(w2_, b2_, a1, a2);
        for (double& v : a2) v = v > 0.0 ? v : 0.0;
        std::vector<double> z;
        affine(w3_, b3_, a2, z);
        return z;
    }

    std::vector<double> backprop_to_input(const std::vector<double>& delta_out,
                                          const std::vector<double>& a1,
                                          const std::vector<double>& a2) const {
        std::vector<double> d2(kHidden2, 0.0);
        for (int c = 0; c < classes_; ++c)
            for (int h = 0; h < kHidden2; ++h) d2[h] += delta_out[c] * w3_.at(c, h);
        for (int h = 0; h < kHidden2; ++h)
            if (a2[h] <= 0.0) d2[h] = 0.0;
        std::vector<double> d1(kHidden1, 0.0);
        for (int h2 = 0; h2 < kHidden2; ++h2)
            for (int h1 = 0; h1 < kHidden1; ++h1) d1[h1] += d2[h2] * w2_.at(h2, h1);
        for (int h = 0; h < kHidden1; ++h)
            if (a1[h] <= 0.0) d1[h] = 0.0;
        std::vector<double> dx(d_, 0.0);
        for (int h = 0; h < kHidden1; ++h)
            for (std::size_t j = 0; j < d_; ++j) dx[j] += d1[h] * w1_.at(h, j);
        return dx;
    }

    double backprop(std::span<const double> x, int label, Grads& g) const {
        std::vector<double> a1, a2;
        auto z = forward(x, a1, a2);
        auto p = softmax(z);
        double loss = -std::log(std::max(p[label], 1e-300));
        std::vector<double> d3 = p;
        d3[label] -= 1.0;
        for (int c = 0; c < classes_; ++c) {
            g.b3[c] += d3[c];
            for (int h = 0; h < kHidden2; ++h) g.w3.at(c, h) += d3[c] * a2[h];
        }
        std::vector<double> d2(kHidden2, 0.0);
        for (int c = 0; c < classes_; ++c)
            for (int h = 0; h < kHidden2; ++h) d2[h] += d3[c] * w3_.at(c, h);
        for (int h = 0; h < kHidden2; ++h)
            if (a2[h] <= 0.0) d2[h] = 0.0;
        for (int h2 = 0; h2 < kHidden2; ++h2) {
            g.b2[h2] += d2[h2];
            for (int h1 = 0; h1 < kHidden1; ++h1) g.w2.at(h2, h1) += d2[h2] * a1[h1];
        }
        std::vector<double> d1(kHidden1, 0.0);
        for (int h2 = 0; h2 < kHidden2; ++h2)
            for (int h1 = 0; h1 < kHidden1; ++h1) d1[h1] += d2[h2] * w2_.at(h2, h1);
        for (int h = 0; h < kHidden1; ++h)
            if (a1[h] <= 0.0) d1[h] = 0.0;
        for (int h = 0; h < kHidden1; ++h) {
            g.b1[h] += d1[h];
            for (std::size_t j = 0; j < d_; ++j) g.w1.at(h, j) += d1[h] * x[j];
        }
        return loss;
    }

    void apply_update(const Grads& vel, double lr) {
        auto upd = [&](std::vector<double>& w, const std::vector<double>& v) {
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * v[i];
        };
        upd(w1_.data(), vel.w1.data());
        upd(w2_.data(), vel.w2.data());
        upd(w3_.data(), vel.w3.data());
        upd(b1_, vel.b1);
        upd(b2_, vel.b2);
        upd(b3_, vel.b3);
    }

    std::size_t d_;
    int classes_;
    std::uint64_t seed_;
    Matrix w1_, w2_, w3_;
    std::vector<double> b1_, b2_, b3_;
};

std::unique_ptr<Model> make_mlp(const ClassifierSpec& s, const LabeledDataset& d) {
    return std::make_unique<MlpModel>(s, d);
}
std::unique_ptr<Model> mlp_from_json(const json& j) { return std::make_unique<MlpModel>(j); }

}  // namespace amds
