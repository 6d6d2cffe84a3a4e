#include "errbar/data.hpp"

#include "errbar/errors.hpp"
#include "errbar/rng.hpp"
#include "errbar/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace errbar {
namespace {

constexpr double kScaledRangeSlack = 1e-12;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.emplace_back(trim(std::string_view(line).substr(start)));
            break;
        }
        cells.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

void strip_bom(std::string& s) {
    if (s.size() >= 3 && s[0] == '\xef' && s[1] == '\xbb' && s[2] == '\xbf') {
        s.erase(0, 3);
    }
}

}  // namespace

void validate_dataset(const Dataset& d) {
    if (d.features.rows() != d.targets.size()) {
        throw ValidationError("dataset: " + std::to_string(d.features.rows()) +
                              " feature rows but " + std::to_string(d.targets.size()) +
                              " targets");
    }
    if (static_cast<Eigen::Index>(d.feature_names.size()) != d.features.cols()) {
        throw ValidationError("dataset: " + std::to_string(d.feature_names.size()) +
                              " feature names for " + std::to_string(d.features.cols()) +
                              " columns");
    }
    if (!d.features.allFinite() || !d.targets.allFinite()) {
        throw ValidationError("dataset contains non-finite entries");
    }
    if (d.space == FeatureSpace::scaled) {
        const double lo = d.features.size() ? d.features.minCoeff() : 0.0;
        const double hi = d.features.size() ? d.features.maxCoeff() : 0.0;
        if (lo < -kScaledRangeSlack || hi > 1.0 + kScaledRangeSlack) {
            throw ValidationError("scaled dataset has entries outside [0,1]");
        }
    }
}

bool MinMaxScaler::is_degenerate(Eigen::Index col) const {
    return std::binary_search(degenerate_cols.begin(), degenerate_cols.end(), col);
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != n_features()) {
        throw ValidationError("scaler fitted on " + std::to_string(n_features()) +
                              " columns, got " + std::to_string(X.cols()));
    }
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (is_degenerate(j)) {
            out.col(j).setZero();
        } else {
            out.col(j) = (X.col(j).array() - mins[j]) / (maxs[j] - mins[j]);
        }
    }
    return out;
}

Eigen::MatrixXd MinMaxScaler::inverse_transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != n_features()) {
        throw ValidationError("scaler fitted on " + std::to_string(n_features()) +
                              " columns, got " + std::to_string(X.cols()));
    }
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (is_degenerate(j)) {
            out.col(j).setConstant(mins[j]);
        } else {
            out.col(j) = X.col(j).array() * (maxs[j] - mins[j]) + mins[j];
        }
    }
    return out;
}

std::vector<Eigen::Index> FoldAssignment::rows_in_fold(int fold) const {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
        if (fold_of_row[i] == fold) rows.push_back(static_cast<Eigen::Index>(i));
    }
    return rows;
}

std::vector<Eigen::Index> FoldAssignment::rows_not_in_fold(int fold) const {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
        if (fold_of_row[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
    }
    return rows;
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path + "'");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path + ": empty file, expected a header row");
    }
    strip_bom(line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    CsvTable table;
    table.columns = split_line(line);

    std::unordered_map<std::string, Eigen::Index> seen;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (table.columns[j].empty()) {
            throw ValidationError(path + ": empty header name in column " + std::to_string(j + 1));
        }
        if (!seen.emplace(table.columns[j], static_cast<Eigen::Index>(j)).second) {
            throw ValidationError(path + ": duplicate column name '" + table.columns[j] + "'");
        }
    }

    std::vector<double> values;
    Eigen::Index row_index = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        ++row_index;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != table.columns.size()) {
            throw ValidationError(path + ": row " + std::to_string(row_index) + " has " +
                                  std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(table.columns.size()));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v = 0.0;
            if (!parse_double_strict(cells[j], v)) {
                throw ValidationError(path + ": row " + std::to_string(row_index) +
                                      ", column '" + table.columns[j] + "': cannot parse '" +
                                      cells[j] + "' as a finite number");
            }
            values.push_back(v);
        }
    }
    if (row_index == 0) {
        throw ValidationError(path + ": no data rows");
    }

    const auto cols = static_cast<Eigen::Index>(table.columns.size());
    table.cells.resize(row_index, cols);
    for (Eigen::Index i = 0; i < row_index; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            table.cells(i, j) = values[static_cast<std::size_t>(i * cols + j)];
        }
    }
    return table;
}

Dataset load_dataset_csv(const std::string& path, const std::string& target_column,
                         const std::vector<std::string>& feature_columns) {
    const CsvTable table = read_csv_table(path);

    std::unordered_map<std::string, Eigen::Index> col_of;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        col_of.emplace(table.columns[j], static_cast<Eigen::Index>(j));
    }

    const auto target_it = col_of.find(target_column);
    if (target_it == col_of.end()) {
        throw ValidationError(path + ": target column '" + target_column + "' not found");
    }
    const Eigen::Index target_col = target_it->second;

    std::vector<Eigen::Index> feature_cols;
    std::vector<std::string> names;
    if (feature_columns.empty()) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            if (static_cast<Eigen::Index>(j) == target_col) continue;
            feature_cols.push_back(static_cast<Eigen::Index>(j));
            names.push_back(table.columns[j]);
        }
    } else {
        for (const auto& name : feature_columns) {
            const auto it = col_of.find(name);
            if (it == col_of.end()) {
                throw ValidationError(path + ": feature column '" + name + "' not found");
            }
            if (it->second == target_col) {
                throw ValidationError(path + ": column '" + name +
                                      "' requested as both feature and target");
            }
            feature_cols.push_back(it->second);
            names.push_back(name);
        }
    }
    if (feature_cols.empty()) {
        throw ValidationError(path + ": no feature columns");
    }

    Dataset d;
    d.features.resize(table.cells.rows(), static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
        d.features.col(static_cast<Eigen::Index>(j)) = table.cells.col(feature_cols[j]);
    }
    d.targets = table.cells.col(target_col);
    d.feature_names = std::move(names);
    d.target_name = target_column;
    d.space = FeatureSpace::raw;
    validate_dataset(d);
    return d;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write '" + path + "'");
    }
    for (const auto& name : d.feature_names) out << name << ',';
    out << d.target_name << '\n';
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        for (Eigen::Index j = 0; j < d.n_features(); ++j) {
            out << format_double(d.features(i, j)) << ',';
        }
        out << format_double(d.targets[i]) << '\n';
    }
}

MinMaxScaler fit_scaler(const Dataset& d) {
    if (d.n_rows() < 1) {
        throw ValidationError("cannot fit a scaler on an empty dataset");
    }
    MinMaxScaler s;
    s.mins = d.features.colwise().minCoeff();
    s.maxs = d.features.colwise().maxCoeff();
    for (Eigen::Index j = 0; j < d.n_features(); ++j) {
        if (s.mins[j] == s.maxs[j]) s.degenerate_cols.push_back(j);
    }
    return s;
}

Dataset apply_scaler(const MinMaxScaler& s, const Dataset& d) {
    Dataset out = d;
    out.features = s.transform(d.features);
    out.space = FeatureSpace::scaled;
    return out;
}

Dataset invert_scaler(const MinMaxScaler& s, const Dataset& d) {
    Dataset out = d;
    out.features = s.inverse_transform(d.features);
    out.space = FeatureSpace::raw;
    return out;
}

FoldAssignment kfold_split(Eigen::Index n_rows, int k, std::uint64_t seed) {
    if (k < 2) {
        throw ValidationError("kfold_split: k must be >= 2, got " + std::to_string(k));
    }
    if (n_rows < k) {
        throw ValidationError("kfold_split: " + std::to_string(n_rows) +
                              " rows cannot fill " + std::to_string(k) + " folds");
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n_rows));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    SplitMix64 gen(substream_seed(seed, {tag::kFoldSplit}));
    for (Eigen::Index i = n_rows - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(gen.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    FoldAssignment fa;
    fa.k = k;
    fa.fold_of_row.resize(static_cast<std::size_t>(n_rows));
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        fa.fold_of_row[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
            static_cast<int>(i % k);
    }
    return fa;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    }
    return out;
}

Eigen::VectorXd gather_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = v[rows[i]];
    }
    return out;
}

Dataset dataset_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.features = gather_rows(d.features, rows);
    out.targets = gather_rows(d.targets, rows);
    out.feature_names = d.feature_names;
    out.target_name = d.target_name;
    out.space = d.space;
    return out;
}

std::uint64_t hash_dataset(const Dataset& d) {
    Fnv1a64 h;
    for (const auto& name : d.feature_names) {
        h.update(name);
        h.update(",", 1);
    }
    h.update(d.target_name);
    const auto rows = d.features.rows();
    const auto cols = d.features.cols();
    h.update(&rows, sizeof(rows));
    h.update(&cols, sizeof(cols));
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = d.features(i, j);
            h.update(&v, sizeof(v));
        }
        const double t = d.targets[i];
        h.update(&t, sizeof(t));
    }
    return h.digest();
}

}  // namespace errbar
