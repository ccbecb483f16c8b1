#include "grls/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "grls/errors.hpp"
#include "grls/rls_core.hpp"
#include "validate.hpp"

namespace grls {

using detail::check_lambda;

namespace {

constexpr double kDenomEps = 1e-12;

// LOO predictions for the subset, using the primal shortcut while the subset
// is smaller than m-1 and the dual one otherwise.
Eigen::VectorXd loo_for_subset(const Dataset& data,
                               const std::vector<int>& subset, double lambda) {
  if (static_cast<Index>(subset.size()) < data.n_examples() - 1) {
    return loo_primal(data, subset, lambda).values;
  }
  const auto [model, solution] = train_dual(data, subset, lambda);
  return loo_dual(solution, data.labels).values;
}

RlsModel train_for_subset(const Dataset& data, const std::vector<int>& subset,
                          double lambda) {
  if (static_cast<Index>(subset.size()) < data.n_examples() - 1) {
    return train_primal(data, subset, lambda);
  }
  return train_dual(data, subset, lambda).first;
}

void validate_selection_args(const Dataset& data, double lambda, int k,
                             Loss loss) {
  data.validate();
  check_lambda(lambda);
  if (k < 1) throw DataError("feature selection: k must be at least 1");
  if (loss == Loss::zero_one) require_binary_labels(data.labels);
}

// Error criterion and minimum updated diagonal for one candidate, given
// w1 = G v. Uses the same zero-one decision rule as the greedy kernel
// (y * a~ >= d~ counts as an error).
std::pair<double, double> lowrank_score(const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& g_diag,
                                        const Eigen::VectorXd& y,
                                        const Eigen::Ref<const Eigen::VectorXd>& w1,
                                        double denom, Loss loss) {
  const double invden = 1.0 / denom;
  const double beta = w1.dot(y) * invden;
  const Eigen::ArrayXd a_new = a.array() - w1.array() * beta;
  const Eigen::ArrayXd d_new = g_diag.array() - w1.array().square() * invden;
  const double dmin = d_new.minCoeff();
  double err = 0.0;
  if (loss == Loss::squared) {
    err = (a_new / d_new).square().sum();
  } else {
    err = static_cast<double>((y.array() * a_new >= d_new).count());
  }
  return {err, dmin};
}

[[noreturn]] void raise_lowrank_degenerate(double denom, int feature) {
  if (denom <= kDenomEps) {
    throw NumericalError(
        "low-rank evaluation: denominator 1 + v.Gv <= 1e-12 for feature " +
        std::to_string(feature));
  }
  throw NumericalError(
      "low-rank evaluation: updated diagonal entry <= 0 for feature " +
      std::to_string(feature) +
      " (accumulated roundoff; rebuild the selection state)");
}

void check_lowrank_shapes(const LowRankState& state, const Dataset& data) {
  const Index m = data.n_examples();
  if (state.dual.size() != m || state.g.rows() != m || state.g.cols() != m) {
    throw DataError("low-rank state does not match the dataset's shape");
  }
}

}  // namespace

SelectionTrace select_wrapper(const Dataset& data, double lambda, int k,
                              Loss loss, const StepObserver& observer) {
  validate_selection_args(data, lambda, k, loss);
  if (data.n_examples() < 2) {
    throw DataError("select_wrapper: need at least 2 examples for LOO");
  }
  const int n = static_cast<int>(data.n_features());
  const int k_eff = std::min(k, n);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<int> selected;
  SelectionTrace trace;
  std::vector<int> candidate_set;
  for (int step = 0; step < k_eff; ++step) {
    bool found = false;
    double best_error = 0.0;
    int best_feature = -1;
    Eigen::VectorXd best_loo;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      candidate_set = selected;
      candidate_set.push_back(i);
      const Eigen::VectorXd loo = loo_for_subset(data, candidate_set, lambda);
      const double error = sum_loss(loss, data.labels, loo);
      if (!found || error < best_error) {
        found = true;
        best_error = error;
        best_feature = i;
        best_loo = loo;
      }
    }
    selected.push_back(best_feature);
    used[static_cast<std::size_t>(best_feature)] = 1;
    trace.steps.push_back({best_feature, best_error});
    if (observer) {
      const RlsModel model = train_for_subset(data, selected, lambda);
      observer(StepInfo{step, best_feature, best_error, selected,
                        model.weights, best_loo});
    }
  }
  trace.model = train_for_subset(data, selected, lambda);
  return trace;
}

LowRankState lowrank_init(const Dataset& data, double lambda) {
  data.validate();
  check_lambda(lambda);
  const Index m = data.n_examples();
  LowRankState state;
  state.lambda = lambda;
  state.g = Eigen::MatrixXd::Identity(m, m) / lambda;
  state.dual = data.labels / lambda;
  return state;
}

double lowrank_evaluate(const LowRankState& state, const Dataset& data,
                        int feature, Loss loss, Eigen::MatrixXd* g_tilde) {
  check_lowrank_shapes(state, data);
  if (feature < 0 || feature >= data.n_features()) {
    throw DataError("lowrank_evaluate: feature index " +
                    std::to_string(feature) + " out of range");
  }
  for (const int i : state.selected) {
    if (i == feature) {
      throw DataError("lowrank_evaluate: feature " + std::to_string(feature) +
                      " is already selected");
    }
  }
  if (loss == Loss::zero_one) require_binary_labels(data.labels);
  const Eigen::VectorXd v = data.features.row(feature).transpose();
  const Eigen::VectorXd w1 = state.g * v;
  const double denom = 1.0 + v.dot(w1);
  if (denom <= kDenomEps) raise_lowrank_degenerate(denom, feature);
  const auto [error, dmin] = lowrank_score(
      state.dual, state.g.diagonal(), data.labels, w1, denom, loss);
  if (dmin <= 0.0) raise_lowrank_degenerate(denom, feature);
  if (g_tilde) {
    g_tilde->noalias() = state.g - w1 * (w1 / denom).transpose();
  }
  return error;
}

void lowrank_commit(LowRankState& state, const Dataset& data, int b) {
  check_lowrank_shapes(state, data);
  if (b < 0 || b >= data.n_features()) {
    throw DataError("lowrank_commit: feature index " + std::to_string(b) +
                    " out of range");
  }
  for (const int i : state.selected) {
    if (i == b) {
      throw DataError("lowrank_commit: feature " + std::to_string(b) +
                      " is already selected");
    }
  }
  const Eigen::VectorXd v = data.features.row(b).transpose();
  const Eigen::VectorXd w1 = state.g * v;
  const double denom = 1.0 + v.dot(w1);
  if (denom <= kDenomEps) raise_lowrank_degenerate(denom, b);
  state.g.noalias() -= w1 * (w1 / denom).transpose();
  state.dual.noalias() = state.g * data.labels;
  state.selected.push_back(b);
}

SelectionTrace select_lowrank(const Dataset& data, double lambda, int k,
                              Loss loss, const StepObserver& observer) {
  validate_selection_args(data, lambda, k, loss);
  const Index m = data.n_examples();
  const int n = static_cast<int>(data.n_features());
  const int k_eff = std::min(k, n);

  LowRankState state = lowrank_init(data, lambda);
  // The transpose of the row-major feature matrix viewed column-major:
  // column i is feature row i, contiguous.
  const Eigen::Map<const Eigen::MatrixXd> vt(data.features.data(), m,
                                             data.n_features());
  Eigen::MatrixXd w(m, data.n_features());
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  SelectionTrace trace;
  for (int step = 0; step < k_eff; ++step) {
    // One matrix product computes G v for every candidate at once; each
    // column equals the w1 of lowrank_evaluate for that feature.
    w.noalias() = state.g * vt;
    const Eigen::VectorXd g_diag = state.g.diagonal();
    bool found = false;
    double best_error = 0.0;
    int best_feature = -1;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double denom = 1.0 + vt.col(i).dot(w.col(i));
      if (denom <= kDenomEps) raise_lowrank_degenerate(denom, i);
      const auto [error, dmin] =
          lowrank_score(state.dual, g_diag, data.labels, w.col(i), denom, loss);
      if (dmin <= 0.0) raise_lowrank_degenerate(denom, i);
      if (!found || error < best_error) {
        found = true;
        best_error = error;
        best_feature = i;
      }
    }
    lowrank_commit(state, data, best_feature);
    used[static_cast<std::size_t>(best_feature)] = 1;
    trace.steps.push_back({best_feature, best_error});
    if (observer) {
      const Eigen::VectorXd weights =
          select_feature_rows(data.features, state.selected) * state.dual;
      const Eigen::VectorXd loo =
          data.labels - state.dual.cwiseQuotient(state.g.diagonal());
      observer(StepInfo{step, best_feature, best_error, state.selected,
                        weights, loo});
    }
  }
  trace.model.selected = state.selected;
  trace.model.weights =
      select_feature_rows(data.features, state.selected) * state.dual;
  trace.model.lambda = lambda;
  return trace;
}

}  // namespace grls
