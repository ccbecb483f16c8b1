#pragma once

#include <Eigen/Core>
#include <vector>

#include "grls/dataset.hpp"
#include "grls/loss.hpp"
#include "grls/selection.hpp"

namespace grls {

// Working state of greedy forward selection with rank-one updates. For the
// current selected set S, with G = (X_S^T X_S + lambda I)^{-1}:
//   dual  = a = G y
//   diag  = d, d_j = G_{j,j}
//   cache = C = G X^T, logically m x n, stored column-major so the column
//           C(:,i) for one candidate feature i is contiguous.
struct SelectionState {
  std::vector<int> selected;
  Eigen::VectorXd dual;
  Eigen::VectorXd diag;
  Eigen::MatrixXd cache;
  double lambda = 1.0;
};

// S = {}, a = y/lambda, d = 1/lambda, C = X^T/lambda. O(mn).
SelectionState init_state(const Dataset& data, double lambda);

struct CandidateEval {
  double error;       // sum of per-example losses on LOO predictions
  Eigen::VectorXd u;  // update vector, reusable by commit_feature
};

// Scores adding feature i to the current set in O(m) without modifying the
// state: with v = X_i and c = C(:,i),
//   u = c / (1 + v.c),  a~ = a - u (v.a),  d~_j = d_j - u_j c_j,
// and the error sums loss(y_j, y_j - a~_j / d~_j). Throws NumericalError when
// the denominator is <= 1e-12 or any d~_j <= 0.
CandidateEval evaluate_candidate(const SelectionState& state,
                                 const Dataset& data, int feature, Loss loss);

// Applies the rank-one update for feature b using the u produced by
// evaluate_candidate on this exact state: a -= u (v.a), d_j -= u_j C(j,b),
// C -= u (v^T C), S += b. O(mn), dominated by the cache update.
void commit_feature(SelectionState& state, const Dataset& data, int b,
                    const Eigen::VectorXd& u);

// Weight vector w = X_S a of the model the state represents.
Eigen::VectorXd state_weights(const SelectionState& state, const Dataset& data);

// LOO predictions of the current state: y_j - a_j / d_j.
Eigen::VectorXd state_loo_values(const SelectionState& state,
                                 const Eigen::VectorXd& labels);

struct GreedyOptions {
  // Candidate evaluations per round are split across this many threads; the
  // result is identical at any setting.
  int threads = 1;
  // When positive, every this-many commits the dual vector and diagonal are
  // recomputed from scratch and compared (tolerance 1e-6); disagreement
  // throws NumericalError. Debugging aid, off by default.
  int debug_recompute_interval = 0;
};

// Greedy forward selection: each round evaluates every unselected feature,
// commits the strict minimizer of the LOO criterion (first minimum wins, i.e.
// lowest index on ties), and records (feature, error). Selects min(k, n)
// features. O(k m n) total.
SelectionTrace select_greedy(const Dataset& data, double lambda, int k,
                             Loss loss, const GreedyOptions& options = {},
                             const StepObserver& observer = {});

// Commits a caller-specified feature order instead of the argmin, recording
// each feature's criterion value at commit time. Backs the random-selection
// baseline and keeps its traces comparable to greedy ones.
SelectionTrace select_forced_order(const Dataset& data, double lambda,
                                   const std::vector<int>& order, Loss loss,
                                   const StepObserver& observer = {});

}  // namespace grls
