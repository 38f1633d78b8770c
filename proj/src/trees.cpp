#include "trees.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace amds::trees {

std::vector<double> leaf_distribution(const Tree& tree, int node, int class_count) {
    const auto& counts = tree.leaf_counts[node];
    double total = 0.0;
    for (int c : counts) total += c;
    std::vector<double> dist(class_count);
    // Laplace +1 keeps probabilities off exact 0/1.
    for (int c = 0; c < class_count; ++c)
        dist[c] = (counts[c] + 1.0) / (total + class_count);
    return dist;
}

namespace {

double gini(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double g = 1.0;
    for (double c : counts) {
        double p = c / total;
        g -= p * p;
    }
    return g;
}

struct ClassBuilder {
    const Matrix& X;
    const std::vector<int>& y;
    int class_count;
    const std::vector<int>& w;
    const ClassTreeParams& params;
    std::mt19937_64& rng;
    Tree tree;

    int add_leaf(const std::vector<double>& counts) {
        int id = static_cast<int>(tree.feature.size());
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.value.push_back(0.0);
        std::vector<int> ic(counts.size());
        for (std::size_t c = 0; c < counts.size(); ++c) ic[c] = static_cast<int>(counts[c]);
        tree.leaf_counts.push_back(std::move(ic));
        return id;
    }

    int build(std::vector<int>& rows, int depth) {
        std::vector<double> counts(class_count, 0.0);
        double total = 0.0;
        for (int r : rows) {
            counts[y[r]] += w[r];
            total += w[r];
        }
        double node_gini = gini(counts, total);
        bool stoppable = depth >= params.max_depth || node_gini <= 1e-12 ||
                         static_cast<int>(rows.size()) < params.min_samples_split;
        if (stoppable) return add_leaf(counts);

        std::vector<int> candidate_features(X.cols());
        std::iota(candidate_features.begin(), candidate_features.end(), 0);
        if (params.features_per_split > 0 &&
            params.features_per_split < static_cast<int>(X.cols())) {
            std::shuffle(candidate_features.begin(), candidate_features.end(), rng);
            candidate_features.resize(params.features_per_split);
            std::sort(candidate_features.begin(), candidate_features.end());
        }

        int best_f = -1;
        double best_thr = 0.0, best_gain = 1e-12;
        std::vector<std::pair<double, int>> order(rows.size());
        std::vector<double> lc(class_count);
        for (int f : candidate_features) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                order[i] = {X.at(rows[i], f), rows[i]};
            std::sort(order.begin(), order.end());
            std::fill(lc.begin(), lc.end(), 0.0);
            double lt = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                int r = order[i].second;
                lc[y[r]] += w[r];
                lt += w[r];
                if (order[i + 1].first <= order[i].first) continue;
                double rt = total - lt;
                if (lt <= 0.0 || rt <= 0.0) continue;
                std::vector<double> rc(class_count);
                for (int c = 0; c < class_count; ++c) rc[c] = counts[c] - lc[c];
                double child = (lt / total) * gini(lc, lt) + (rt / total) * gini(rc, rt);
                double gain = node_gini - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = f;
                    best_thr = 0.5 * (order[i].first + order[i + 1].first);
                }
            }
        }
        if (best_f < 0) return add_leaf(counts);

        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (X.at(r, best_f) < best_thr ? left_rows : right_rows).push_back(r);
        if (left_rows.empty() || right_rows.empty()) return add_leaf(counts);

        int id = static_cast<int>(tree.feature.size());
        tree.feature.push_back(best_f);
        tree.threshold.push_back(best_thr);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.value.push_back(0.0);
        tree.leaf_counts.emplace_back();
        rows.clear();
        rows.shrink_to_fit();
        int l = build(left_rows, depth + 1);
        int r = build(right_rows, depth + 1);
        tree.left[id] = l;
        tree.right[id] = r;
        return id;
    }
};

}  // namespace

Tree fit_classification_tree(const Matrix& X, const std::vector<int>& y, int class_count,
                             const std::vector<int>& sample_weight,
                             const ClassTreeParams& params, std::mt19937_64& rng) {
    ClassBuilder b{X, y, class_count, sample_weight, params, rng, {}};
    std::vector<int> rows;
    for (std::size_t i = 0; i < X.rows(); ++i)
        if (sample_weight[i] > 0) rows.push_back(static_cast<int>(i));
    b.build(rows, 0);
    return b.tree;
}

namespace {

struct RegSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

struct RegBuilder {
    const Matrix& X;
    const std::vector<double>& g;
    const std::vector<double>& h;
    const std::vector<std::vector<int>>& sorted_idx;
    const RegTreeParams& params;

    Tree tree;
    std::vector<int> node_of_row;
    std::vector<double> node_g, node_h;
    std::vector<int> node_depth;

    double leaf_value(double G, double H) const { return -G / (H + params.reg_lambda); }
    double score(double G, double H) const { return G * G / (H + params.reg_lambda); }

    int new_node(double G, double H, int depth) {
        int id = static_cast<int>(tree.feature.size());
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.value.push_back(leaf_value(G, H));
        tree.leaf_counts.emplace_back();
        node_g.push_back(G);
        node_h.push_back(H);
        node_depth.push_back(depth);
        return id;
    }

    // Best split for one leaf: scan each feature's global sorted order,
    // filtering rows by membership.
    RegSplit best_split(int node) const {
        RegSplit best;
        best.gain = 1e-12;
        const double G = node_g[node], H = node_h[node];
        const double parent = score(G, H);
        for (std::size_t f = 0; f < X.cols(); ++f) {
            double gl = 0.0, hl = 0.0;
            double prev = 0.0;
            bool has_prev = false;
            for (int r : sorted_idx[f]) {
                if (node_of_row[r] != node) continue;
                double v = X.at(r, f);
                if (has_prev && v > prev + 1e-12) {
                    double hr = H - hl;
                    if (hl >= params.min_child_hess && hr >= params.min_child_hess) {
                        double gr = G - gl;
                        double gain = 0.5 * (score(gl, hl) + score(gr, hr) - parent);
                        if (gain > best.gain) {
                            best.gain = gain;
                            best.feature = static_cast<int>(f);
                            best.threshold = 0.5 * (prev + v);
                        }
                    }
                }
                gl += g[r];
                hl += h[r];
                prev = v;
                has_prev = true;
            }
        }
        return best;
    }

    void apply_split(int node, const RegSplit& s) {
        double gl = 0.0, hl = 0.0;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            if (node_of_row[r] != node) continue;
            if (X.at(r, s.feature) < s.threshold) {
                gl += g[r];
                hl += h[r];
            }
        }
        int l = new_node(gl, hl, node_depth[node] + 1);
        int r = new_node(node_g[node] - gl, node_h[node] - hl, node_depth[node] + 1);
        tree.feature[node] = s.feature;
        tree.threshold[node] = s.threshold;
        tree.left[node] = l;
        tree.right[node] = r;
        for (std::size_t row = 0; row < X.rows(); ++row) {
            if (node_of_row[row] != node) continue;
            node_of_row[row] = X.at(row, s.feature) < s.threshold ? l : r;
        }
    }
};

}  // namespace

Tree fit_regression_tree(const Matrix& X, const std::vector<double>& grad,
                         const std::vector<double>& hess,
                         const std::vector<std::vector<int>>& sorted_idx,
                         const RegTreeParams& params) {
    RegBuilder b{X, grad, hess, sorted_idx, params, {}, {}, {}, {}, {}};
    b.node_of_row.assign(X.rows(), 0);
    double G = 0.0, H = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        G += grad[i];
        H += hess[i];
    }
    b.new_node(G, H, 0);

    if (!params.leaf_wise) {
        std::vector<int> frontier = {0};
        while (!frontier.empty()) {
            std::vector<int> next;
            for (int node : frontier) {
                if (b.node_depth[node] >= params.max_depth) continue;
                RegSplit s = b.best_split(node);
                if (s.feature < 0) continue;
                b.apply_split(node, s);
                next.push_back(b.tree.left[node]);
                next.push_back(b.tree.right[node]);
            }
            frontier = std::move(next);
        }
    } else {
        // Grow by repeatedly splitting the highest-gain leaf.
        auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
            return a.first < b.first || (a.first == b.first && a.second > b.second);
        };
        std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                            decltype(cmp)>
            heap(cmp);
        std::vector<RegSplit> pending(1);
        pending[0] = b.best_split(0);
        if (pending[0].feature >= 0) heap.push({pending[0].gain, 0});
        int leaves = 1;
        while (leaves < params.max_leaves && !heap.empty()) {
            auto [gain, node] = heap.top();
            heap.pop();
            const RegSplit s = pending[node];
            if (s.feature < 0) continue;
            b.apply_split(node, s);
            ++leaves;
            pending.resize(b.tree.feature.size());
            for (int child : {b.tree.left[node], b.tree.right[node]}) {
                if (b.node_depth[child] >= 64) continue;
                pending[child] = b.best_split(child);
                if (pending[child].feature >= 0) heap.push({pending[child].gain, child});
            }
        }
    }
    return b.tree;
}

}  // namespace amds::trees
