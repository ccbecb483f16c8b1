#include "grls/evaluation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <new>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "grls/baselines.hpp"
#include "grls/errors.hpp"
#include "grls/greedy.hpp"
#include "grls/rls_core.hpp"
#include "validate.hpp"

namespace grls {

namespace {

void check_folds(const FoldAssignment& folds, Index m) {
  if (folds.n_folds < 2) {
    throw DataError("fold assignment must have at least 2 folds");
  }
  if (static_cast<Index>(folds.fold_of_example.size()) != m) {
    throw DataError("fold assignment length does not match example count");
  }
  for (const int f : folds.fold_of_example) {
    if (f < 0 || f >= folds.n_folds) {
      throw DataError("fold assignment contains an out-of-range fold id");
    }
  }
}

std::vector<double> sorted_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DataError("lambda grid must not be empty");
  for (const double g : grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw DataError("lambda grid values must be positive and finite");
    }
  }
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

// Shared fold loop for the greedy/lowrank/wrapper curves and the random
// baseline; `run_selector` executes one selector on a training fold and must
// invoke the observer after every step.
using FoldSelector = std::function<void(
    const Dataset& train, int fold, double lambda, const StepObserver&)>;

CurveReport run_folds(const Dataset& data, int k_max,
                      const FoldAssignment& folds,
                      const std::vector<double>& grid, Loss loss,
                      const CvOptions& options,
                      const FoldSelector& run_selector) {
  data.validate();
  if (k_max < 1 || k_max > data.n_features()) {
    throw DataError("curve k_max must be between 1 and the feature count");
  }
  check_folds(folds, data.n_examples());
  require_binary_labels(data.labels);
  const std::vector<double> grid_sorted = sorted_grid(grid);

  CurveReport report;
  report.k_values.resize(static_cast<std::size_t>(k_max));
  std::iota(report.k_values.begin(), report.k_values.end(), 1);
  report.per_fold_test.setZero(folds.n_folds, k_max);
  report.per_fold_loo.setZero(folds.n_folds, k_max);
  report.lambda_per_fold.resize(static_cast<std::size_t>(folds.n_folds));

  const auto groups = folds.fold_indices();
  std::vector<int> train_idx;
  for (int f = 0; f < folds.n_folds; ++f) {
    const std::vector<int>& test_idx = groups[static_cast<std::size_t>(f)];
    if (test_idx.empty()) {
      throw DataError("fold " + std::to_string(f) + " is empty");
    }
    train_idx.clear();
    for (int j = 0; j < static_cast<int>(data.n_examples()); ++j) {
      if (folds.fold_of_example[static_cast<std::size_t>(j)] != f) {
        train_idx.push_back(j);
      }
    }
    Dataset train = subset_examples(data, train_idx);
    Dataset test = subset_examples(data, test_idx);
    if (options.standardize) {
      const FeatureScaler scaler = FeatureScaler::fit(train.features);
      scaler.apply(train.features);
      scaler.apply(test.features);
    }
    const double lambda = grid_search_lambda(train, grid_sorted, loss);
    report.lambda_per_fold[static_cast<std::size_t>(f)] = lambda;
    const StepObserver observer = [&](const StepInfo& info) {
      const Eigen::VectorXd test_pred =
          predict(info.selected, info.weights, test.features);
      report.per_fold_test(f, info.step) = accuracy(test_pred, test.labels);
      report.per_fold_loo(f, info.step) =
          accuracy(info.loo_values, train.labels);
    };
    run_selector(train, f, lambda, observer);
  }

  report.mean_test_accuracy.resize(static_cast<std::size_t>(k_max));
  report.mean_loo_accuracy.resize(static_cast<std::size_t>(k_max));
  for (int s = 0; s < k_max; ++s) {
    report.mean_test_accuracy[static_cast<std::size_t>(s)] =
        report.per_fold_test.col(s).mean();
    report.mean_loo_accuracy[static_cast<std::size_t>(s)] =
        report.per_fold_loo.col(s).mean();
  }
  return report;
}

}  // namespace

double accuracy(const Eigen::VectorXd& predictions,
                const Eigen::VectorXd& labels) {
  if (predictions.size() != labels.size()) {
    throw DataError("accuracy: predictions and labels differ in length");
  }
  if (labels.size() == 0) throw DataError("accuracy: empty input");
  require_binary_labels(labels);
  const auto correct = (labels.array() * predictions.array() > 0.0).count();
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::vector<double> pow2_grid(int lo, int hi) {
  if (lo > hi) throw DataError("pow2_grid: lower exponent exceeds upper");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int p = lo; p <= hi; ++p) {
    grid.push_back(std::ldexp(1.0, p));
  }
  return grid;
}

double grid_search_lambda(const Dataset& data, const std::vector<double>& grid,
                          Loss loss) {
  data.validate();
  if (loss == Loss::zero_one) require_binary_labels(data.labels);
  const std::vector<double> grid_sorted = sorted_grid(grid);
  const Index m = data.n_examples();
  const Index n = data.n_features();
  if (m < 2) throw DataError("grid search needs at least 2 examples");

  // One eigendecomposition of the Gram matrix serves the whole grid: with
  // X X^T = U diag(e) U^T, the full-feature-set fits and leverages for every
  // lambda are O(nm) reweightings of the projected data, so a 31-point grid
  // costs one factorization instead of 31. The primal route computes the same
  // quantities as loo_primal (used when n < m), the dual route the same as
  // train_dual + loo_dual.
  const Eigen::VectorXd& y = data.labels;
  const bool use_primal = n < m;
  Eigen::MatrixXd gram;
  if (use_primal) {
    gram.noalias() = data.features * data.features.transpose();  // n x n
  } else {
    gram.noalias() = data.features.transpose() * data.features;  // m x m
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram);
  if (eigen.info() != Eigen::Success) {
    throw NumericalError("grid search: eigendecomposition failed");
  }
  // The Gram matrix is positive semidefinite; clip eigenvalue roundoff so
  // e_i + lambda stays positive for every grid value.
  const Eigen::ArrayXd evals = eigen.eigenvalues().array().cwiseMax(0.0);

  bool found = false;
  double best_lambda = grid_sorted.front();
  double best_error = 0.0;
  Eigen::VectorXd loo(m);
  const auto consider = [&](double lambda, double error) {
    // Ascending grid + strict < resolves ties toward the smallest lambda.
    if (!found || error < best_error) {
      found = true;
      best_error = error;
      best_lambda = lambda;
    }
  };

  if (use_primal) {
    const Eigen::MatrixXd z = eigen.eigenvectors().transpose() * data.features;
    const Eigen::MatrixXd zsq = z.array().square().matrix();
    const Eigen::VectorXd b = eigen.eigenvectors().transpose() * (data.features * y);
    for (const double lambda : grid_sorted) {
      const Eigen::ArrayXd inv = 1.0 / (evals + lambda);
      const Eigen::VectorXd f = z.transpose() * (inv * b.array()).matrix();
      const Eigen::VectorXd q = zsq.transpose() * inv.matrix();
      for (Index j = 0; j < m; ++j) {
        const double denom = 1.0 - q[j];
        if (std::abs(denom) <= 1e-12) {
          throw NumericalError("grid search: degenerate leverage at example " +
                               std::to_string(j));
        }
        loo[j] = (f[j] - q[j] * y[j]) / denom;
      }
      consider(lambda, sum_loss(loss, y, loo));
    }
  } else {
    const Eigen::MatrixXd& v = eigen.eigenvectors();
    const Eigen::MatrixXd vsq = v.array().square().matrix();
    const Eigen::VectorXd by = v.transpose() * y;
    for (const double lambda : grid_sorted) {
      const Eigen::ArrayXd inv = 1.0 / (evals + lambda);
      const Eigen::VectorXd a = v * (inv * by.array()).matrix();
      // Diagonal of the inverse; positive because rows of V have unit norm.
      const Eigen::VectorXd g_diag = vsq * inv.matrix();
      loo = y - a.cwiseQuotient(g_diag);
      consider(lambda, sum_loss(loss, y, loo));
    }
  }
  return best_lambda;
}

CurveReport cv_feature_curve(const Dataset& data, int k_max,
                             const FoldAssignment& folds,
                             const std::vector<double>& grid,
                             SelectorKind algorithm, Loss loss,
                             const CvOptions& options) {
  if (algorithm == SelectorKind::random) {
    throw DataError(
        "cv_feature_curve does not drive random selection; use "
        "random_baseline");
  }
  const FoldSelector run = [&](const Dataset& train, int /*fold*/,
                               double lambda, const StepObserver& observer) {
    switch (algorithm) {
      case SelectorKind::greedy: {
        GreedyOptions greedy_options;
        greedy_options.threads = options.threads;
        select_greedy(train, lambda, k_max, loss, greedy_options, observer);
        break;
      }
      case SelectorKind::lowrank:
        select_lowrank(train, lambda, k_max, loss, observer);
        break;
      case SelectorKind::wrapper:
        select_wrapper(train, lambda, k_max, loss, observer);
        break;
      case SelectorKind::random:
        break;  // unreachable
    }
  };
  return run_folds(data, k_max, folds, grid, loss, options, run);
}

CurveReport random_baseline(const Dataset& data, int k, std::uint64_t seed,
                            const FoldAssignment& folds,
                            const std::vector<double>& grid, Loss loss,
                            const CvOptions& options) {
  data.validate();
  if (k < 1 || k > data.n_features()) {
    throw DataError("random_baseline: k must be between 1 and the feature "
                    "count");
  }
  // One draw per fold, all from a single seeded stream, fixed fold order.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> orders;
  orders.reserve(static_cast<std::size_t>(folds.n_folds));
  std::vector<int> perm(static_cast<std::size_t>(data.n_features()));
  for (int f = 0; f < folds.n_folds; ++f) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    orders.emplace_back(perm.begin(), perm.begin() + k);
  }
  const FoldSelector run = [&](const Dataset& train, int fold, double lambda,
                               const StepObserver& observer) {
    select_forced_order(train, lambda,
                        orders[static_cast<std::size_t>(fold)], loss, observer);
  };
  return run_folds(data, k, folds, grid, loss, options, run);
}

ScalingReport scaling_benchmark(const std::vector<Index>& m_values, Index n,
                                int k,
                                const std::vector<SelectorKind>& algorithms,
                                std::uint64_t seed,
                                const BenchmarkOptions& options) {
  if (m_values.empty()) throw DataError("benchmark: m list must not be empty");
  if (n < 1) throw DataError("benchmark: need at least one feature");
  if (k < 1) throw DataError("benchmark: k must be at least 1");
  if (algorithms.empty()) {
    throw DataError("benchmark: algorithm list must not be empty");
  }
  for (const SelectorKind alg : algorithms) {
    if (alg == SelectorKind::random) {
      throw DataError("benchmark: random selection is not a timed algorithm");
    }
  }
  if (options.repeats < 1) {
    throw DataError("benchmark: repeats must be at least 1");
  }

  const std::size_t n_algs = algorithms.size();
  std::vector<std::vector<ScalingRow>> rows_per_alg(n_algs);
  std::vector<char> skip(n_algs, 0);
  ScalingReport report;

  for (const Index m : m_values) {
    const Dataset data =
        synth_two_gaussians(m, n, std::min<Index>(50, n), 1.0, seed);
    for (std::size_t a = 0; a < n_algs; ++a) {
      if (skip[a]) continue;
      const SelectorKind alg = algorithms[a];
      std::vector<double> times;
      times.reserve(static_cast<std::size_t>(options.repeats));
      try {
        for (int r = 0; r < options.repeats; ++r) {
          const auto start = std::chrono::steady_clock::now();
          switch (alg) {
            case SelectorKind::greedy: {
              GreedyOptions greedy_options;
              greedy_options.threads = options.threads;
              select_greedy(data, options.lambda, k, options.loss,
                            greedy_options);
              break;
            }
            case SelectorKind::lowrank:
              select_lowrank(data, options.lambda, k, options.loss);
              break;
            case SelectorKind::wrapper:
              select_wrapper(data, options.lambda, k, options.loss);
              break;
            case SelectorKind::random:
              break;  // rejected above
          }
          const auto stop = std::chrono::steady_clock::now();
          times.push_back(std::chrono::duration<double>(stop - start).count());
        }
      } catch (const std::bad_alloc&) {
        report.notes.push_back(to_string(alg) + " skipped from m=" +
                               std::to_string(m) + ": memory exhausted");
        skip[a] = 1;
        continue;
      }
      std::sort(times.begin(), times.end());
      const std::size_t mid = times.size() / 2;
      const double median =
          times.size() % 2 == 1
              ? times[mid]
              : 0.5 * (times[mid - 1] + times[mid]);
      rows_per_alg[a].push_back(
          {to_string(alg), m, n, k, std::max(median, 1e-9)});
    }
  }

  for (std::size_t a = 0; a < n_algs; ++a) {
    const auto& rows = rows_per_alg[a];
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    // Log-log regression needs at least two distinct sizes.
    std::vector<double> lx;
    std::vector<double> ly;
    for (const ScalingRow& row : rows) {
      const double x = std::log(static_cast<double>(row.m));
      if (std::find(lx.begin(), lx.end(), x) != lx.end()) continue;
      lx.push_back(x);
      ly.push_back(std::log(row.wall_seconds));
    }
    if (lx.size() < 2) continue;
    const double count = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    report.slopes.emplace_back(to_string(algorithms[a]), slope);
  }
  return report;
}

}  // namespace grls
