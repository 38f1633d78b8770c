#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "amds/core.hpp"

namespace amds {

/// Flow feature matrix with dense class labels. feature_sigma keeps the
/// pre-standardization training std-devs of each column so attacks can be
/// expressed in original feature units.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    int class_count = 0;
    std::vector<double> feature_sigma;
    std::vector<std::string> schema;

    std::size_t size() const { return features.rows(); }
    std::size_t dims() const { return features.cols(); }
    LabeledDataset subset(const std::vector<std::size_t>& idx) const;
};

/// Column statistics fitted on training data only.
struct Scaler {
    std::vector<double> means;          // kept columns, original units
    std::vector<double> stds;           // kept columns, population std
    std::vector<std::string> schema;    // kept column names
    std::vector<std::string> dropped_columns;  // zero-variance columns

    std::string to_json_string() const;
    static Scaler from_json_string(const std::string& text);
};

/// Benign training distribution N(mu, sigma) with a ridge-regularized
/// inverse for the Mahalanobis score.
struct BenignDistribution {
    std::vector<double> mu;
    Matrix sigma;
    Matrix sigma_inv;  // inverse of (sigma + ridge_lambda * I)
    double ridge_lambda = 0.0;
};

struct SplitSpec {
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// CSV ingestion. Header row required; label column selected by name;
/// missing cells imputed by column median; duplicate rows removed; labels
/// densified to 0..C-1 by sorted original value.
LabeledDataset load_csv(const std::string& path, const std::string& label_column);

Scaler standardize_fit(const LabeledDataset& train);
LabeledDataset standardize_apply(const Scaler& scaler, const LabeledDataset& data);
/// Maps standardized features back to original units (kept columns only).
Matrix unstandardize(const Scaler& scaler, const Matrix& standardized);

std::tuple<LabeledDataset, LabeledDataset, LabeledDataset>
stratified_split(const LabeledDataset& data, const SplitSpec& spec);

/// Index sets of the split, for callers that need to trace rows.
std::tuple<std::vector<std::size_t>, std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const LabeledDataset& data, const SplitSpec& spec);

/// ridge_lambda < 0 selects the default 1e-6 * trace(sigma) / d.
BenignDistribution benign_stats(const LabeledDataset& train, int benign_label,
                                double ridge_lambda = -1.0);

/// Desk-scale surrogate data: Gaussian clusters with equally spaced class
/// means (regular simplex, randomly rotated into the full feature space).
/// Label 0 is benign. Requires dims >= classes.
LabeledDataset synth_generate(int classes, int dims, int per_class, double separation,
                              std::uint64_t seed);

/// Cholesky factorization of an SPD matrix; throws DataError if not PD.
Matrix cholesky(const Matrix& spd);
/// Inverse via Cholesky; input must be SPD.
Matrix spd_inverse(const Matrix& spd);
/// Solves spd * x = b via Cholesky.
std::vector<double> spd_solve(const Matrix& spd, std::span<const double> b);

}  // namespace amds
