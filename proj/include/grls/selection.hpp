#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "grls/rls_core.hpp"

namespace grls {

struct SelectionStep {
  int feature;       // chosen feature index
  double loo_error;  // sum of per-example losses on LOO predictions
};

// Auditable output of any selector: the per-round choices plus the final
// sparse model over the selected set.
struct SelectionTrace {
  std::vector<SelectionStep> steps;
  RlsModel model;
};

// Snapshot passed to a StepObserver after each committed feature. References
// stay valid only during the callback.
struct StepInfo {
  int step;          // 0-based selection round
  int feature;       // feature committed this round
  double loo_error;  // criterion value recorded for this round
  const std::vector<int>& selected;      // selection so far, in order
  const Eigen::VectorXd& weights;        // w = X_S a for the current set
  const Eigen::VectorXd& loo_values;     // LOO predictions for the current set
};

using StepObserver = std::function<void(const StepInfo&)>;

enum class SelectorKind { greedy, lowrank, wrapper, random };

std::string to_string(SelectorKind kind);

// Parses "greedy", "lowrank", "wrapper" or "random"; throws DataError.
SelectorKind selector_from_string(std::string_view name);

}  // namespace grls
