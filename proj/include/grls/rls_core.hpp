#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "grls/dataset.hpp"

namespace grls {

// Sparse linear predictor: f(x) = sum_s weights[s] * x[selected[s]].
struct RlsModel {
  std::vector<int> selected;  // ordered, duplicate-free feature indices
  Eigen::VectorXd weights;    // aligned with selected
  double lambda = 1.0;        // regularization strength used in training
};

// Dual-side training byproducts for the current selected set: a = G y and
// diag(G), where G = (K + lambda I)^{-1} and K = X_S^T X_S.
struct DualSolution {
  Eigen::VectorXd dual;    // a, length m
  Eigen::VectorXd g_diag;  // diagonal of G, length m, strictly positive
};

struct LooPredictions {
  // Entry j is the prediction for example j by a model trained on the other
  // m-1 examples.
  Eigen::VectorXd values;
};

// Solves the n_S x n_S normal equations
// w = (X_S X_S^T + lambda I)^{-1} X_S y. Requires a non-empty selected set.
RlsModel train_primal(const Dataset& data, const std::vector<int>& selected,
                      double lambda);

// Solves the m x m dual system w = X_S (X_S^T X_S + lambda I)^{-1} y and
// returns a together with diag(G). Accepts an empty selected set (K = 0,
// a = y/lambda, diag = 1/lambda, empty w).
std::pair<RlsModel, DualSolution> train_dual(const Dataset& data,
                                             const std::vector<int>& selected,
                                             double lambda);

// Leave-one-out predictions from one primal factorization: with
// f = (w^T X_S)^T and leverage q_j = X_{S,j}^T (X_S X_S^T + lambda I)^{-1}
// X_{S,j}, entry j is (1 - q_j)^{-1} (f_j - q_j y_j). Throws NumericalError
// when |1 - q_j| <= 1e-12.
LooPredictions loo_primal(const Dataset& data, const std::vector<int>& selected,
                          double lambda);

// Leave-one-out predictions from dual quantities: y_j - a_j / g_diag_j.
LooPredictions loo_dual(const DualSolution& solution,
                        const Eigen::VectorXd& labels);

// Oracle: retrains without each example in turn (m primal trainings).
LooPredictions loo_bruteforce(const Dataset& data,
                              const std::vector<int>& selected, double lambda);

// Applies the sparse predictor to each column of a feature-major matrix.
Eigen::VectorXd predict(const RlsModel& model, const FeatureMatrix& features);
Eigen::VectorXd predict(const std::vector<int>& selected,
                        const Eigen::VectorXd& weights,
                        const FeatureMatrix& features);

}  // namespace grls
