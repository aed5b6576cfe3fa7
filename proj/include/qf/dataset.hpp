#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qf/labelset.hpp"

namespace qf {

enum class FeatureKind {
    Numeric,
    Ordinal,       // ordered category already mapped to a number
    Categorical,   // raw category codes, awaiting one-hot encoding
    OneHotMember,  // one binary column of an encoded categorical
};

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;

    // Bounds in original units, kept for display after scaling.
    double lower = 0.0;
    double upper = 1.0;

    // Bounds of the values currently stored in the data matrix. Equal to
    // lower/upper until min-max scaling maps them to [0, 1].
    double domain_lo = 0.0;
    double domain_hi = 1.0;

    std::vector<std::string> categories;        // Categorical: value per code
    std::string source;                         // OneHotMember: source feature
    std::string category;                       // OneHotMember: encoded value
    std::map<std::string, double> ordinal_map;  // Ordinal: text value -> rank
};

/// Schema of the feature columns: kinds, bounds in both unit systems, and
/// the mapping from source categoricals to their one-hot member columns.
struct FeatureSpace {
    std::vector<Feature> features;
    // source categorical name -> member feature names, in category order
    std::map<std::string, std::vector<std::string>> categorical_groups;

    int index_of(const std::string& name) const;
    std::vector<int> group_member_indices(const std::string& source) const;

    /// Map a stored value of feature j back to original units.
    double to_original(int j, double v) const;
    /// Map an original-unit value of feature j into stored units.
    double from_original(int j, double v) const;

    /// Category of `source` active in instance x ("" when no member is set).
    std::string active_category(const std::string& source,
                                const Eigen::VectorXd& x) const;
};

struct Dataset {
    FeatureSpace space;
    Eigen::MatrixXd rows;    // n_rows x n_features
    Eigen::MatrixXi labels;  // n_rows x n_labels, entries in {0, 1}
    std::vector<std::string> label_names;
    bool scaled = false;

    Eigen::Index n_rows() const { return rows.rows(); }
    Eigen::Index n_features() const { return rows.cols(); }
    Eigen::Index n_labels() const { return labels.cols(); }

    Eigen::VectorXd row(Eigen::Index i) const { return rows.row(i); }
    Labelset labelset(Eigen::Index i) const;
};

/// Sidecar schema: which CSV columns are categorical or ordinal, and which
/// are labels. Ordinal columns carry an explicit text -> rank map; the value
/// order is never guessed.
struct SidecarSchema {
    std::vector<std::string> categorical;
    std::map<std::string, std::map<std::string, double>> ordinal;
    std::vector<std::string> labels;

    static SidecarSchema from_file(const std::string& path);
    static SidecarSchema from_json_text(const std::string& text);
};

/// Load an RFC-4180 CSV (header row required). Numeric columns get
/// mean-imputed missing values; categorical columns mode-imputed. Feature
/// bounds are set to the observed per-column min/max.
Dataset load_csv(const std::string& path, const SidecarSchema& schema);

/// Convenience overload: all non-label columns are numeric.
Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& label_columns);

/// Min-max scale numeric and ordinal columns to [0, 1]. Constant columns map
/// to 0. Original-unit bounds stay on the FeatureSpace so rule endpoints can
/// be displayed in original units.
Dataset minmax_scale(Dataset ds);

/// Replace a categorical column by one binary column per observed value,
/// named `<feature>_<value>`. Exactly one member is 1 per row.
Dataset onehot_encode(Dataset ds, const std::string& feature);

/// Full preprocessing: scale, then one-hot encode every categorical column.
Dataset preprocess(Dataset ds);

/// Rebuild `raw` (an unscaled dataset loaded with the same sidecar schema)
/// in the units and column layout of `model_space`. Used when explaining
/// instances against a previously trained model.
Dataset to_model_units(const Dataset& raw, const FeatureSpace& model_space);
Eigen::VectorXd row_to_model_units(const Dataset& raw, Eigen::Index i,
                                   const FeatureSpace& model_space);

/// Synthetic predictive-maintenance dataset: six machine-sensor features and
/// three failure labels (TWF, PWF, OSF) assigned by fixed threshold logic.
/// Rows with no failure are resampled, so every row has at least one positive
/// label and the label cardinality stays close to 1. Deterministic per seed.
Dataset generate_ai4i_like(std::size_t n, std::uint64_t seed);

/// Serialize the current data matrix + labels as CSV (shortest round-trip
/// number formatting, so equal datasets produce byte-identical files).
std::string to_csv(const Dataset& ds);
void save_csv(const Dataset& ds, const std::string& path);

/// Sidecar schema JSON matching `ds` (used next to a generated CSV).
std::string sidecar_json(const Dataset& ds);

} // namespace qf
