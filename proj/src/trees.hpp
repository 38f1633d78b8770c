#pragma once

// Internal tree machinery shared by the decision tree, random forest and the
// two gradient-boosted variants. Not part of the public surface.

#include <cstdint>
#include <random>
#include <vector>

#include "amds/core.hpp"

namespace amds::trees {

// Flat node storage. feature < 0 marks a leaf; for classification leaves,
// leaf_counts holds raw class counts (Laplace smoothing applied at predict
// time); for regression leaves, value holds the leaf weight.
struct Tree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;                   // regression leaves
    std::vector<std::vector<int>> leaf_counts;   // classification leaves

    int walk(std::span<const double> x) const {
        int node = 0;
        while (feature[node] >= 0)
            node = x[feature[node]] < threshold[node] ? left[node] : right[node];
        return node;
    }
};

struct ClassTreeParams {
    int max_depth = 10;
    int min_samples_split = 2;
    // 0 = use all features; otherwise sample this many per split.
    int features_per_split = 0;
};

// Sample weights support bootstrap multiplicity; rng only used when
// features_per_split > 0.
Tree fit_classification_tree(const Matrix& X, const std::vector<int>& y, int class_count,
                             const std::vector<int>& sample_weight,
                             const ClassTreeParams& params, std::mt19937_64& rng);

std::vector<double> leaf_distribution(const Tree& tree, int node, int class_count);

struct RegTreeParams {
    int max_depth = 6;      // depth-wise growth bound
    int max_leaves = 31;    // leaf-wise growth bound
    bool leaf_wise = false;
    double reg_lambda = 1.0;
    double min_child_hess = 1.0;
};

// Fits a regression tree to per-row (gradient, hessian); leaf value is
// -G/(H+lambda). sorted_idx[f] is the argsort of feature f, shared across
// all rounds of a boosting fit.
Tree fit_regression_tree(const Matrix& X, const std::vector<double>& grad,
                         const std::vector<double>& hess,
                         const std::vector<std::vector<int>>& sorted_idx,
                         const RegTreeParams& params);

}  // namespace amds::trees
