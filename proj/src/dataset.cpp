#include "amds/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "amds/rng.hpp"
#include "json.hpp"

namespace amds {

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& idx) const {
    LabeledDataset out;
    out.class_count = class_count;
    out.feature_sigma = feature_sigma;
    out.schema = schema;
    out.features = Matrix(idx.size(), features.cols());
    out.labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        auto src = features.row(idx[i]);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        out.labels[i] = labels[idx[i]];
    }
    return out;
}

void SplitSpec::validate() const {
    auto in01 = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in01(train_fraction) || !in01(val_fraction) || !in01(test_fraction))
        throw ConfigError("split fractions must each be in (0,1)");
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Parses a numeric cell. Returns nullopt for cells treated as missing
// (empty, nan, inf). Throws DataError for non-numeric text.
std::optional<double> parse_cell(const std::string& raw, std::size_t row_number,
                                 const std::string& column) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower == "nan" || lower == "inf" || lower == "infinity" || lower == "-inf" ||
        lower == "-infinity")
        return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("schema error: non-numeric cell '" + s + "' in column '" + column +
                        "' at row " + std::to_string(row_number));
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> column_population_stds(const Matrix& features) {
    std::vector<double> stds(features.cols(), 0.0);
    std::vector<double> col(features.rows());
    for (std::size_t j = 0; j < features.cols(); ++j) {
        for (std::size_t i = 0; i < features.rows(); ++i) col[i] = features.at(i, j);
        stds[j] = vec_std_population(col);
    }
    return stds;
}

}  // namespace

LabeledDataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file has no header row: " + path);
    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    std::size_t label_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_idx = j;
    if (label_idx == header.size())
        throw DataError("label column '" + label_column + "' not found in " + path);

    const std::size_t width = header.size();
    const std::size_t d = width - 1;
    std::vector<std::vector<std::optional<double>>> raw_rows;
    std::vector<double> raw_labels;
    std::size_t row_number = 1;  // header = row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != width)
            throw DataError("parse error at row " + std::to_string(row_number) + ": expected " +
                            std::to_string(width) + " fields, got " +
                            std::to_string(fields.size()));
        std::vector<std::optional<double>> row;
        row.reserve(d);
        for (std::size_t j = 0; j < width; ++j) {
            if (j == label_idx) continue;
            row.push_back(parse_cell(fields[j], row_number, header[j]));
        }
        auto lab = parse_cell(fields[label_idx], row_number, label_column);
        if (!lab)
            throw DataError("parse error at row " + std::to_string(row_number) +
                            ": missing label");
        raw_rows.push_back(std::move(row));
        raw_labels.push_back(*lab);
    }
    if (raw_rows.empty()) throw DataError("CSV file has no data rows: " + path);

    // Column medians over present values, then impute.
    std::vector<double> medians(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> present;
        for (const auto& row : raw_rows)
            if (row[j]) present.push_back(*row[j]);
        medians[j] = median_of(std::move(present));
    }

    // Dense label mapping sorted by original value.
    std::set<double> label_values(raw_labels.begin(), raw_labels.end());
    std::map<double, int> label_map;
    int next = 0;
    for (double v : label_values) label_map[v] = next++;

    // Impute, then drop duplicate rows (features + label).
    std::set<std::vector<double>> seen;
    LabeledDataset ds;
    ds.class_count = static_cast<int>(label_values.size());
    ds.features = Matrix(0, d);
    for (std::size_t i = 0; i < raw_rows.size(); ++i) {
        std::vector<double> row(d + 1);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = raw_rows[i][j] ? *raw_rows[i][j] : medians[j];
        row[d] = raw_labels[i];
        if (!seen.insert(row).second) continue;
        ds.features.push_row({row.data(), d});
        ds.labels.push_back(label_map[raw_labels[i]]);
    }

    for (std::size_t j = 0; j < width; ++j)
        if (j != label_idx) ds.schema.push_back(header[j]);
    ds.feature_sigma = column_population_stds(ds.features);
    return ds;
}

Scaler standardize_fit(const LabeledDataset& train) {
    if (train.size() == 0) throw DataError("standardize_fit: empty training set");
    const std::size_t d = train.dims();
    Scaler scaler;
    std::vector<double> col(train.size());
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < train.size(); ++i) col[i] = train.features.at(i, j);
        double m = vec_mean(col);
        double s = vec_std_population(col);
        std::string name = j < train.schema.size() ? train.schema[j] : "f" + std::to_string(j);
        if (s <= 0.0) {
            scaler.dropped_columns.push_back(name);
            continue;
        }
        scaler.means.push_back(m);
        scaler.stds.push_back(s);
        scaler.schema.push_back(name);
    }
    if (scaler.means.empty()) throw DataError("standardize_fit: all columns constant");
    return scaler;
}

LabeledDataset standardize_apply(const Scaler& scaler, const LabeledDataset& data) {
    // Columns are matched positionally against the fitted schema; dropped
    // columns are removed from the output.
    std::vector<std::size_t> keep;
    std::size_t si = 0;
    for (std::size_t j = 0; j < data.dims(); ++j) {
        std::string name = j < data.schema.size() ? data.schema[j] : "f" + std::to_string(j);
        bool dropped = std::find(scaler.dropped_columns.begin(), scaler.dropped_columns.end(),
                                 name) != scaler.dropped_columns.end();
        if (dropped) continue;
        if (si >= scaler.schema.size() || scaler.schema[si] != name)
            throw DataError("standardize_apply: column '" + name + "' does not match scaler");
        keep.push_back(j);
        ++si;
    }
    if (si != scaler.schema.size())
        throw DataError("standardize_apply: dataset missing scaler columns");

    LabeledDataset out;
    out.labels = data.labels;
    out.class_count = data.class_count;
    out.schema = scaler.schema;
    out.feature_sigma = scaler.stds;
    out.features = Matrix(data.size(), keep.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t k = 0; k < keep.size(); ++k)
            out.features.at(i, k) = (data.features.at(i, keep[k]) - scaler.means[k]) / scaler.stds[k];
    if (!out.features.all_finite())
        throw DataError("standardize_apply: non-finite value after scaling");
    return out;
}

Matrix unstandardize(const Scaler& scaler, const Matrix& standardized) {
    Matrix out(standardized.rows(), standardized.cols());
    for (std::size_t i = 0; i < standardized.rows(); ++i)
        for (std::size_t j = 0; j < standardized.cols(); ++j)
            out.at(i, j) = standardized.at(i, j) * scaler.stds[j] + scaler.means[j];
    return out;
}

std::tuple<std::vector<std::size_t>, std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const LabeledDataset& data, const SplitSpec& spec) {
    spec.validate();
    std::vector<std::vector<std::size_t>> by_class(data.class_count);
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);
    for (int c = 0; c < data.class_count; ++c)
        if (by_class[c].size() < 3)
            throw DataError("stratified_split: class " + std::to_string(c) + " has only " +
                            std::to_string(by_class[c].size()) + " samples (need >= 3)");

    auto rng = make_rng(component_seed(spec.seed, "split"));
    std::vector<std::size_t> train_idx, val_idx, test_idx;
    for (int c = 0; c < data.class_count; ++c) {
        auto& idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n = static_cast<long long>(idx.size());
        auto n_train = static_cast<long long>(std::llround(spec.train_fraction * n));
        auto n_val = static_cast<long long>(std::llround(spec.val_fraction * n));
        n_train = std::max(1LL, std::min(n_train, n - 2));
        n_val = std::max(1LL, std::min(n_val, n - n_train - 1));
        long long n_test = n - n_train - n_val;  // >= 1 by construction
        for (long long i = 0; i < n_train; ++i) train_idx.push_back(idx[i]);
        for (long long i = n_train; i < n_train + n_val; ++i) val_idx.push_back(idx[i]);
        for (long long i = n_train + n_val; i < n; ++i) test_idx.push_back(idx[i]);
        (void)n_test;
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {train_idx, val_idx, test_idx};
}

std::tuple<LabeledDataset, LabeledDataset, LabeledDataset>
stratified_split(const LabeledDataset& data, const SplitSpec& spec) {
    auto [tr, va, te] = stratified_split_indices(data, spec);
    return {data.subset(tr), data.subset(va), data.subset(te)};
}

Matrix cholesky(const Matrix& spd) {
    const std::size_t n = spd.rows();
    Matrix L(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = spd.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
            if (i == j) {
                if (s <= 0.0) throw DataError("cholesky: matrix not positive definite");
                L.at(i, i) = std::sqrt(s);
            } else {
                L.at(i, j) = s / L.at(j, j);
            }
        }
    }
    return L;
}

std::vector<double> spd_solve(const Matrix& spd, std::span<const double> b) {
    Matrix L = cholesky(spd);
    const std::size_t n = spd.rows();
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L.at(i, k) * y[k];
        y[i] = s / L.at(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= L.at(k, ii) * x[k];
        x[ii] = s / L.at(ii, ii);
    }
    return x;
}

Matrix spd_inverse(const Matrix& spd) {
    const std::size_t n = spd.rows();
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        auto col = spd_solve(spd, e);
        for (std::size_t i = 0; i < n; ++i) inv.at(i, j) = col[i];
        e[j] = 0.0;
    }
    // Symmetrize to wash out round-off asymmetry.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.5 * (inv.at(i, j) + inv.at(j, i));
            inv.at(i, j) = v;
            inv.at(j, i) = v;
        }
    return inv;
}

BenignDistribution benign_stats(const LabeledDataset& train, int benign_label,
                                double ridge_lambda) {
    const std::size_t d = train.dims();
    std::vector<std::size_t> benign;
    for (std::size_t i = 0; i < train.size(); ++i)
        if (train.labels[i] == benign_label) benign.push_back(i);
    if (benign.size() < d + 1)
        throw DataError("benign_stats: ill-conditioned, only " + std::to_string(benign.size()) +
                        " benign rows for " + std::to_string(d) +
                        " features; provide more data or a larger ridge_lambda");

    BenignDistribution out;
    out.mu.assign(d, 0.0);
    for (std::size_t i : benign)
        for (std::size_t j = 0; j < d; ++j) out.mu[j] += train.features.at(i, j);
    for (double& m : out.mu) m /= static_cast<double>(benign.size());

    out.sigma = Matrix(d, d);
    for (std::size_t i : benign) {
        auto row = train.features.row(i);
        for (std::size_t a = 0; a < d; ++a) {
            double da = row[a] - out.mu[a];
            for (std::size_t b = a; b < d; ++b)
                out.sigma.at(a, b) += da * (row[b] - out.mu[b]);
        }
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double v = out.sigma.at(a, b) / static_cast<double>(benign.size());
            out.sigma.at(a, b) = v;
            out.sigma.at(b, a) = v;
        }

    if (ridge_lambda < 0.0) {
        double tr = 0.0;
        for (std::size_t a = 0; a < d; ++a) tr += out.sigma.at(a, a);
        ridge_lambda = 1e-6 * tr / static_cast<double>(d);
        if (ridge_lambda <= 0.0) ridge_lambda = 1e-12;
    }
    out.ridge_lambda = ridge_lambda;

    Matrix reg = out.sigma;
    for (std::size_t a = 0; a < d; ++a) reg.at(a, a) += ridge_lambda;
    try {
        out.sigma_inv = spd_inverse(reg);
    } catch (const DataError&) {
        throw DataError("benign_stats: covariance ill-conditioned even after ridge; "
                        "use a larger ridge_lambda");
    }
    return out;
}

LabeledDataset synth_generate(int classes, int dims, int per_class, double separation,
                              std::uint64_t seed) {
    if (classes < 2) throw ConfigError("synth_generate: need >= 2 classes");
    if (dims < 2) throw ConfigError("synth_generate: need >= 2 dims");
    if (dims < classes)
        throw ConfigError("synth_generate: dims must be >= classes for simplex spacing");
    if (per_class < 1) throw ConfigError("synth_generate: per_class must be >= 1");

    const std::size_t d = static_cast<std::size_t>(dims);
    const std::size_t C = static_cast<std::size_t>(classes);
    auto rng = make_rng(component_seed(seed, "synth"));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Regular simplex vertices in the first C coordinates: the centered unit
    // basis of R^C has pairwise distance sqrt(2); scale so pairwise class-mean
    // spacing = separation. Keeping the embedding axis-aligned mirrors flow
    // features, where individual columns carry class signal.
    Matrix means(C, d);
    const double scale = separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < C; ++j)
            means.at(c, j) =
                scale * ((j == c ? 1.0 : 0.0) - 1.0 / static_cast<double>(C));

    // Each cluster gets its own anisotropic covariance plus a per-class
    // overall scale (benign stays at 1), mirroring how real flow classes
    // spread unevenly and sit at different radii from benign traffic.
    const double kEigenLo = 0.55, kEigenHi = 1.65;
    const double kClassScaleLo = 0.65, kClassScaleHi = 1.75;
    std::uniform_real_distribution<double> eigen_draw(kEigenLo, kEigenHi);
    std::uniform_real_distribution<double> class_scale_draw(kClassScaleLo, kClassScaleHi);
    std::vector<Matrix> shape(C);  // Q diag(sqrt(lambda)) scaled, row-major d x d
    for (std::size_t c = 0; c < C; ++c) {
        Matrix q(d, d);
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<double> v(d);
            for (auto& x : v) x = gauss(rng);
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < d; ++i) proj += v[i] * q.at(i, k);
                for (std::size_t i = 0; i < d; ++i) v[i] -= proj * q.at(i, k);
            }
            double norm = l2_norm(v);
            for (std::size_t i = 0; i < d; ++i) q.at(i, j) = v[i] / norm;
        }
        double class_scale = c == 0 ? 1.0 : class_scale_draw(rng);
        shape[c] = Matrix(d, d);
        for (std::size_t j = 0; j < d; ++j) {
            double s = class_scale * std::sqrt(eigen_draw(rng));
            for (std::size_t i = 0; i < d; ++i) shape[c].at(i, j) = q.at(i, j) * s;
        }
    }

    LabeledDataset ds;
    ds.class_count = classes;
    ds.features = Matrix(C * static_cast<std::size_t>(per_class), d);
    ds.labels.resize(C * static_cast<std::size_t>(per_class));
    std::vector<double> z(d);
    std::size_t r = 0;
    for (std::size_t c = 0; c < C; ++c) {
        for (int k = 0; k < per_class; ++k, ++r) {
            for (auto& v : z) v = gauss(rng);
            for (std::size_t i = 0; i < d; ++i) {
                double noise = 0.0;
                for (std::size_t j = 0; j < d; ++j) noise += shape[c].at(i, j) * z[j];
                ds.features.at(r, i) = means.at(c, i) + noise;
            }
            ds.labels[r] = static_cast<int>(c);
        }
    }
    for (std::size_t j = 0; j < d; ++j) ds.schema.push_back("f" + std::to_string(j));
    ds.feature_sigma = column_population_stds(ds.features);
    return ds;
}

std::string Scaler::to_json_string() const {
    nlohmann::json j;
    j["means"] = means;
    j["feature_sigma"] = stds;
    j["schema"] = schema;
    j["dropped_columns"] = dropped_columns;
    return j.dump(2);
}

Scaler Scaler::from_json_string(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    Scaler s;
    s.means = j.at("means").get<std::vector<double>>();
    s.stds = j.at("feature_sigma").get<std::vector<double>>();
    s.schema = j.at("schema").get<std::vector<std::string>>();
    s.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
    return s;
}

}  // namespace amds
