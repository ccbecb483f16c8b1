// Internal input-validation helpers shared by the solver and selector
// translation units. Not part of the public headers.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "grls/dataset.hpp"
#include "grls/errors.hpp"

namespace grls::detail {

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DataError("lambda must be a positive finite number");
  }
}

inline void check_selected(const Dataset& data,
                           const std::vector<int>& selected, bool allow_empty) {
  if (selected.empty()) {
    if (allow_empty) return;
    throw DataError("selected feature set must not be empty");
  }
  std::vector<char> seen(static_cast<std::size_t>(data.n_features()), 0);
  for (const int i : selected) {
    if (i < 0 || i >= data.n_features()) {
      throw DataError("selected feature index " + std::to_string(i) +
                      " out of range");
    }
    if (seen[static_cast<std::size_t>(i)]) {
      throw DataError("selected feature index " + std::to_string(i) +
                      " appears twice");
    }
    seen[static_cast<std::size_t>(i)] = 1;
  }
}

inline void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite result");
  }
}

}  // namespace grls::detail
