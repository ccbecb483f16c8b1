#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grls {

using Index = Eigen::Index;

// Feature-major storage: row i holds feature i across all examples, so each
// feature's m values are contiguous in memory.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  FeatureMatrix features;                  // n_features x n_examples
  Eigen::VectorXd labels;                  // n_examples
  std::vector<std::string> feature_names;  // empty, or one name per feature

  Index n_features() const { return features.rows(); }
  Index n_examples() const { return features.cols(); }

  // Throws DataError if shapes disagree, any value is non-finite, or the
  // dataset is empty.
  void validate() const;
};

struct FoldAssignment {
  std::vector<int> fold_of_example;  // size n_examples, values in [0, n_folds)
  int n_folds = 0;

  // Example indices grouped by fold, ascending within each fold.
  std::vector<std::vector<int>> fold_indices() const;
};

// Reads sparse `label index:value ...` text with 1-based, strictly increasing
// indices per line; `#` starts a comment. Densifies into feature-major form.
// If n_features is given the matrix has exactly that many rows and larger
// indices are an error; otherwise the max observed index decides.
Dataset load_libsvm(const std::string& path,
                    std::optional<Index> n_features = std::nullopt);

// Writes the dataset in the same sparse text format, omitting zero entries.
// Values use shortest round-trip formatting so reloading is exact.
void save_libsvm(const Dataset& data, const std::string& path);

// Reads a rectangular numeric CSV with a header row. label_column is matched
// against header names first; if no name matches and it parses as a
// non-negative integer it is used as a 0-based column index.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Two-class Gaussian generator: labels are +1 for the first m/2 examples and
// -1 for the rest; the first n_informative feature rows have class-conditional
// means of +/- separation/2 with unit variance, remaining rows are standard
// normal noise. Deterministic for a fixed seed.
Dataset synth_two_gaussians(Index n_examples, Index n_features,
                            Index n_informative, double separation,
                            std::uint64_t seed);

// Deterministic per seed. For binary {-1,+1} labels each class is shuffled
// and dealt round-robin so per-fold class counts differ from perfect
// proportions by at most one example per class; other label sets get plain
// shuffled folds.
FoldAssignment stratified_folds(const Eigen::VectorXd& labels, int n_folds,
                                std::uint64_t seed);

// Copies the given example columns (and labels) into a new dataset.
Dataset subset_examples(const Dataset& data, const std::vector<int>& examples);

// Copies the given feature rows, in order; used to form X_S.
FeatureMatrix select_feature_rows(const FeatureMatrix& features,
                                  const std::vector<int>& rows);

// Maps labels equal to positive_label to +1 and all others to -1.
void binarize_labels(Dataset& data, double positive_label);

// Appends a constant-1 feature row (explicit intercept term).
void append_bias_feature(Dataset& data);

// Per-feature affine transform to zero mean / unit variance, fitted on
// training data. Constant features are left untouched so an appended bias
// feature survives standardization.
struct FeatureScaler {
  Eigen::VectorXd offset;  // subtracted per feature
  Eigen::VectorXd scale;   // divisor per feature, never zero

  static FeatureScaler fit(const FeatureMatrix& features);
  void apply(FeatureMatrix& features) const;
};

}  // namespace grls
