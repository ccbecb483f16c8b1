#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>

namespace grls {

// Loss used to score leave-one-out predictions during selection. zero_one
// requires labels in {-1,+1} and counts a prediction p as an error when
// y * p <= 0, i.e. a prediction of exactly zero counts as an error.
enum class Loss { squared, zero_one };

// Per-example loss for one (label, prediction) pair.
double loss_value(Loss loss, double label, double prediction);

// Sum of per-example losses over aligned vectors.
double sum_loss(Loss loss, const Eigen::VectorXd& labels,
                const Eigen::VectorXd& predictions);

std::string to_string(Loss loss);

// Parses "squared" or "zero_one"; throws DataError otherwise.
Loss loss_from_string(std::string_view name);

// Throws DataError unless every label is exactly -1 or +1.
void require_binary_labels(const Eigen::VectorXd& labels);

}  // namespace grls
