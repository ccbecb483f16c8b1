#include "grls/loss.hpp"

#include <string>

#include "grls/errors.hpp"

namespace grls {

double loss_value(Loss loss, double label, double prediction) {
  if (loss == Loss::squared) {
    const double r = label - prediction;
    return r * r;
  }
  return label * prediction <= 0.0 ? 1.0 : 0.0;
}

double sum_loss(Loss loss, const Eigen::VectorXd& labels,
                const Eigen::VectorXd& predictions) {
  if (labels.size() != predictions.size()) {
    throw DataError("sum_loss: labels and predictions differ in length");
  }
  if (loss == Loss::squared) {
    return (labels - predictions).squaredNorm();
  }
  return static_cast<double>(
      (labels.array() * predictions.array() <= 0.0).count());
}

std::string to_string(Loss loss) {
  return loss == Loss::squared ? "squared" : "zero_one";
}

Loss loss_from_string(std::string_view name) {
  if (name == "squared") return Loss::squared;
  if (name == "zero_one") return Loss::zero_one;
  throw DataError("unknown loss '" + std::string(name) +
                  "' (expected squared or zero_one)");
}

void require_binary_labels(const Eigen::VectorXd& labels) {
  for (Eigen::Index j = 0; j < labels.size(); ++j) {
    if (labels[j] != 1.0 && labels[j] != -1.0) {
      throw DataError("label at example " + std::to_string(j) + " is " +
                      std::to_string(labels[j]) +
                      "; zero-one loss requires labels in {-1,+1}");
    }
  }
}

}  // namespace grls
