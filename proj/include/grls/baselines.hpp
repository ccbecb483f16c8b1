#pragma once

#include <Eigen/Core>
#include <vector>

#include "grls/dataset.hpp"
#include "grls/loss.hpp"
#include "grls/selection.hpp"

namespace grls {

// Black-box wrapper selection: each round retrains on S u {i} for every
// candidate i and scores it by the leave-one-out shortcut, using the primal
// form while |S u {i}| < m-1 and the dual form otherwise. Exact but slow;
// serves as a correctness oracle.
SelectionTrace select_wrapper(const Dataset& data, double lambda, int k,
                              Loss loss, const StepObserver& observer = {});

// Dual selection state with the full inverse kept explicitly:
// g = G = (X_S^T X_S + lambda I)^{-1}, dual = a = G y.
struct LowRankState {
  std::vector<int> selected;
  Eigen::VectorXd dual;
  Eigen::MatrixXd g;  // m x m
  double lambda = 1.0;
};

// S = {}, G = I/lambda, a = y/lambda. O(m^2).
LowRankState lowrank_init(const Dataset& data, double lambda);

// Scores adding feature i via the rank-one inverse update: with v = X_i and
// w1 = G v, the updated inverse is G~ = G - w1 w1^T / (1 + v.w1), so
//   a~ = a - w1 (w1.y) / (1 + v.w1),   diag(G~)_j = G_jj - w1_j^2 / (1 + v.w1),
// and the error sums loss(y_j, y_j - a~_j / diag(G~)_j). O(m^2), state
// unmodified. Throws NumericalError when 1 + v.w1 <= 1e-12 or any updated
// diagonal entry is <= 0. If g_tilde is non-null the full updated inverse is
// materialized into it (test hook).
double lowrank_evaluate(const LowRankState& state, const Dataset& data,
                        int feature, Loss loss,
                        Eigen::MatrixXd* g_tilde = nullptr);

// Applies the rank-one inverse update for feature b permanently and refreshes
// a = G y. O(m^2).
void lowrank_commit(LowRankState& state, const Dataset& data, int b);

// Forward selection maintaining the full m x m inverse. Candidate products
// G v are batched into one matrix product per round, which computes the same
// values as lowrank_evaluate on every candidate. Commits go through
// lowrank_commit. O(k n m^2) total, O(m^2 + mn) memory.
SelectionTrace select_lowrank(const Dataset& data, double lambda, int k,
                              Loss loss, const StepObserver& observer = {});

}  // namespace grls
