#include "grls/rls_core.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>
#include <vector>

#include "grls/errors.hpp"
#include "validate.hpp"

namespace grls {

using detail::check_finite;
using detail::check_lambda;
using detail::check_selected;

namespace {

constexpr double kLeverageEps = 1e-12;

// Cholesky factorization of the symmetric positive-definite system matrix;
// failure indicates non-finite input since lambda > 0 guarantees positive
// definiteness.
Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& system,
                                      const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) +
                         ": Cholesky factorization failed (non-finite or "
                         "degenerate system matrix)");
  }
  return llt;
}

}  // namespace

RlsModel train_primal(const Dataset& data, const std::vector<int>& selected,
                      double lambda) {
  data.validate();
  check_lambda(lambda);
  check_selected(data, selected, /*allow_empty=*/false);
  const FeatureMatrix xs = select_feature_rows(data.features, selected);
  Eigen::MatrixXd system = xs * xs.transpose();
  system.diagonal().array() += lambda;
  const auto llt = factorize(system, "train_primal");
  RlsModel model;
  model.selected = selected;
  model.lambda = lambda;
  model.weights = llt.solve(xs * data.labels);
  check_finite(model.weights, "train_primal");
  return model;
}

std::pair<RlsModel, DualSolution> train_dual(const Dataset& data,
                                             const std::vector<int>& selected,
                                             double lambda) {
  data.validate();
  check_lambda(lambda);
  check_selected(data, selected, /*allow_empty=*/true);
  const Index m = data.n_examples();
  RlsModel model;
  model.selected = selected;
  model.lambda = lambda;
  DualSolution solution;
  if (selected.empty()) {
    solution.dual = data.labels / lambda;
    solution.g_diag = Eigen::VectorXd::Constant(m, 1.0 / lambda);
    model.weights.resize(0);
    return {std::move(model), std::move(solution)};
  }
  const FeatureMatrix xs = select_feature_rows(data.features, selected);
  Eigen::MatrixXd system = xs.transpose() * xs;
  system.diagonal().array() += lambda;
  const auto llt = factorize(system, "train_dual");
  solution.dual = llt.solve(data.labels);
  // Eq.-(8)-style LOO needs every diagonal entry of the inverse, so the full
  // inverse is formed here and nowhere else.
  const Eigen::MatrixXd g = llt.solve(Eigen::MatrixXd::Identity(m, m));
  solution.g_diag = g.diagonal();
  check_finite(solution.dual, "train_dual");
  check_finite(solution.g_diag, "train_dual");
  for (Index j = 0; j < m; ++j) {
    if (solution.g_diag[j] <= 0.0) {
      throw NumericalError(
          "train_dual: non-positive diagonal in the inverse at example " +
          std::to_string(j));
    }
  }
  model.weights = xs * solution.dual;
  check_finite(model.weights, "train_dual");
  return {std::move(model), std::move(solution)};
}

LooPredictions loo_primal(const Dataset& data,
                          const std::vector<int>& selected, double lambda) {
  data.validate();
  check_lambda(lambda);
  check_selected(data, selected, /*allow_empty=*/false);
  const Index m = data.n_examples();
  if (m < 2) {
    throw DataError("loo_primal: need at least 2 examples");
  }
  const FeatureMatrix xs = select_feature_rows(data.features, selected);
  Eigen::MatrixXd system = xs * xs.transpose();
  system.diagonal().array() += lambda;
  const auto llt = factorize(system, "loo_primal");
  const Eigen::VectorXd w = llt.solve(xs * data.labels);
  const Eigen::VectorXd f = xs.transpose() * w;
  // Leverages q_j = x_j^T (X_S X_S^T + lambda I)^{-1} x_j, all at once.
  const FeatureMatrix solved = llt.solve(Eigen::MatrixXd(xs));
  const Eigen::VectorXd q =
      (xs.array() * solved.array()).colwise().sum().transpose();
  LooPredictions loo;
  loo.values.resize(m);
  for (Index j = 0; j < m; ++j) {
    const double denom = 1.0 - q[j];
    if (std::abs(denom) <= kLeverageEps) {
      throw NumericalError("loo_primal: degenerate leverage at example " +
                           std::to_string(j) +
                           " (example fully determines the fit)");
    }
    loo.values[j] = (f[j] - q[j] * data.labels[j]) / denom;
  }
  check_finite(loo.values, "loo_primal");
  return loo;
}

LooPredictions loo_dual(const DualSolution& solution,
                        const Eigen::VectorXd& labels) {
  const Index m = labels.size();
  if (solution.dual.size() != m || solution.g_diag.size() != m) {
    throw DataError("loo_dual: solution and labels differ in length");
  }
  for (Index j = 0; j < m; ++j) {
    if (solution.g_diag[j] <= 0.0) {
      throw NumericalError("loo_dual: non-positive diagonal entry at example " +
                           std::to_string(j));
    }
  }
  LooPredictions loo;
  loo.values = labels - solution.dual.cwiseQuotient(solution.g_diag);
  check_finite(loo.values, "loo_dual");
  return loo;
}

LooPredictions loo_bruteforce(const Dataset& data,
                              const std::vector<int>& selected, double lambda) {
  data.validate();
  const Index m = data.n_examples();
  if (m < 2) {
    throw DataError("loo_bruteforce: need at least 2 examples");
  }
  LooPredictions loo;
  loo.values.resize(m);
  std::vector<int> keep(static_cast<std::size_t>(m - 1));
  for (Index j = 0; j < m; ++j) {
    std::size_t t = 0;
    for (Index l = 0; l < m; ++l) {
      if (l != j) keep[t++] = static_cast<int>(l);
    }
    const Dataset rest = subset_examples(data, keep);
    const RlsModel model = train_primal(rest, selected, lambda);
    loo.values[j] = predict(model, data.features.col(j))[0];
  }
  return loo;
}

Eigen::VectorXd predict(const std::vector<int>& selected,
                        const Eigen::VectorXd& weights,
                        const FeatureMatrix& features) {
  if (static_cast<Index>(selected.size()) != weights.size()) {
    throw DataError("predict: selected and weights differ in length");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(features.cols());
  for (std::size_t t = 0; t < selected.size(); ++t) {
    const int i = selected[t];
    if (i < 0 || i >= features.rows()) {
      throw DataError("predict: model feature index " + std::to_string(i) +
                      " out of range for input with " +
                      std::to_string(features.rows()) + " features");
    }
    out += weights[static_cast<Index>(t)] * features.row(i).transpose();
  }
  return out;
}

Eigen::VectorXd predict(const RlsModel& model, const FeatureMatrix& features) {
  return predict(model.selected, model.weights, features);
}

}  // namespace grls
