#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

// Dataset ingestion, min-max scaling and fold assignment: the substrate every
// model in the toolkit trains on.

namespace errbar {

enum class FeatureSpace { raw, scaled };

struct Dataset {
    Eigen::MatrixXd features;  // rows = samples, cols = features
    Eigen::VectorXd targets;
    std::vector<std::string> feature_names;
    std::string target_name;
    FeatureSpace space = FeatureSpace::raw;

    Eigen::Index n_rows() const { return features.rows(); }
    Eigen::Index n_features() const { return features.cols(); }
};

// Shape consistency, finite entries, and (for scaled data) the [0,1] range.
void validate_dataset(const Dataset& d);

// Per-column affine map onto [0,1]. Columns that were constant at fit time
// are recorded as degenerate: they transform to 0.0 and invert back to the
// constant.
struct MinMaxScaler {
    Eigen::VectorXd mins;
    Eigen::VectorXd maxs;
    std::vector<Eigen::Index> degenerate_cols;  // sorted; max == min columns

    Eigen::Index n_features() const { return mins.size(); }
    bool is_degenerate(Eigen::Index col) const;

    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& X) const;
};

struct FoldAssignment {
    std::vector<int> fold_of_row;
    int k = 0;

    std::vector<Eigen::Index> rows_in_fold(int fold) const;
    std::vector<Eigen::Index> rows_not_in_fold(int fold) const;
};

// Fully numeric CSV table: header row required, '.' decimal separator, every
// cell must parse as a finite number.
struct CsvTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd cells;
};

CsvTable read_csv_table(const std::string& path);

// Table split into features and a target column. When feature_columns is
// empty all non-target columns become features, in file order.
Dataset load_dataset_csv(const std::string& path, const std::string& target_column,
                         const std::vector<std::string>& feature_columns = {});

void write_dataset_csv(const Dataset& d, const std::string& path);

MinMaxScaler fit_scaler(const Dataset& d);

// Features mapped per-column onto [0,1]; targets untouched. Values outside
// the fitted range pass through the affine map unclamped.
Dataset apply_scaler(const MinMaxScaler& s, const Dataset& d);

Dataset invert_scaler(const MinMaxScaler& s, const Dataset& d);

// Uniform shuffle (Fisher-Yates on a seeded stream), then deal into k folds
// whose sizes differ by at most one.
FoldAssignment kfold_split(Eigen::Index n_rows, int k, std::uint64_t seed);

// Row subsetting helpers shared by bootstrap, CV and calibration code.
Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows);
Eigen::VectorXd gather_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows);
Dataset dataset_rows(const Dataset& d, const std::vector<Eigen::Index>& rows);

// Content hash over features, targets and column names (provenance).
std::uint64_t hash_dataset(const Dataset& d);

}  // namespace errbar
