#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "grls/dataset.hpp"
#include "grls/loss.hpp"
#include "grls/selection.hpp"

namespace grls {

// Fraction of examples with y_j * p_j > 0; a zero prediction counts as an
// error, consistent with the zero-one loss convention. Labels must be +/-1.
double accuracy(const Eigen::VectorXd& predictions,
                const Eigen::VectorXd& labels);

// {2^p : p = lo..hi}, ascending.
std::vector<double> pow2_grid(int lo, int hi);

// Full-feature-set leave-one-out grid search: returns the grid value with the
// smallest summed LOO loss, preferring the smallest lambda on ties. Uses the
// primal shortcut when n < m and the dual one otherwise.
double grid_search_lambda(const Dataset& data, const std::vector<double>& grid,
                          Loss loss);

// Cross-validated accuracy-vs-k curves. per_fold_* matrices are fold x k.
struct CurveReport {
  std::vector<int> k_values;
  std::vector<double> mean_test_accuracy;  // aligned with k_values
  std::vector<double> mean_loo_accuracy;   // aligned with k_values
  Eigen::MatrixXd per_fold_test;
  Eigen::MatrixXd per_fold_loo;
  std::vector<double> lambda_per_fold;
};

struct CvOptions {
  // Standardize features using training-fold statistics only, applied to both
  // fold sides. Off by default.
  bool standardize = false;
  int threads = 1;  // forwarded to the greedy selector
};

// Per fold: pick lambda by full-feature LOO grid search on the training
// folds, run the selector there, and after every selection step score the
// maintained model (w = X_S a) on the held-out fold and the selector's LOO
// predictions on the training folds. Means are aggregated over folds.
CurveReport cv_feature_curve(const Dataset& data, int k_max,
                             const FoldAssignment& folds,
                             const std::vector<double>& grid,
                             SelectorKind algorithm, Loss loss,
                             const CvOptions& options = {});

// Identical protocol with features drawn uniformly at random without
// replacement, one independent draw per fold, deterministic per seed.
CurveReport random_baseline(const Dataset& data, int k, std::uint64_t seed,
                            const FoldAssignment& folds,
                            const std::vector<double>& grid, Loss loss,
                            const CvOptions& options = {});

struct ScalingRow {
  std::string algorithm;
  Index m = 0;
  Index n = 0;
  int k = 0;
  double wall_seconds = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  // (algorithm, log-log slope of wall_seconds vs m); present only for
  // algorithms timed at >= 2 distinct m values.
  std::vector<std::pair<std::string, double>> slopes;
  std::vector<std::string> notes;  // e.g. runs skipped on memory exhaustion
};

struct BenchmarkOptions {
  int repeats = 3;  // each cell reports the median of this many runs
  double lambda = 1.0;
  Loss loss = Loss::squared;
  int threads = 1;
};

// Generates two-Gaussian data per m (n features, min(50, n) informative,
// separation 1.0) and times each algorithm's full selection, wall-clock,
// selection call only. Memory exhaustion is reported in notes, not thrown.
ScalingReport scaling_benchmark(const std::vector<Index>& m_values, Index n,
                                int k, const std::vector<SelectorKind>& algorithms,
                                std::uint64_t seed,
                                const BenchmarkOptions& options = {});

}  // namespace grls
