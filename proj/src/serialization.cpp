#include "grls/serialization.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "grls/errors.hpp"

namespace grls {

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* key) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) {
    throw DataError(std::string("missing JSON field '") + key + "'");
  }
  return *it;
}

double require_finite_number(const nlohmann::json& j, const char* key) {
  const nlohmann::json& field = require_field(j, key);
  if (!field.is_number()) {
    throw DataError(std::string("JSON field '") + key + "' must be a number");
  }
  const double value = field.get<double>();
  if (!std::isfinite(value)) {
    throw DataError(std::string("JSON field '") + key + "' must be finite");
  }
  return value;
}

const nlohmann::json& require_array(const nlohmann::json& j, const char* key) {
  const nlohmann::json& field = require_field(j, key);
  if (!field.is_array()) {
    throw DataError(std::string("JSON field '") + key + "' must be an array");
  }
  return field;
}

}  // namespace

nlohmann::json to_json(const RlsModel& model) {
  nlohmann::json j;
  j["lambda"] = model.lambda;
  j["selected"] = model.selected;
  std::vector<double> weights(model.weights.data(),
                              model.weights.data() + model.weights.size());
  j["weights"] = weights;
  return j;
}

RlsModel model_from_json(const nlohmann::json& j) {
  RlsModel model;
  model.lambda = require_finite_number(j, "lambda");
  if (!(model.lambda > 0.0)) {
    throw DataError("model lambda must be positive");
  }
  const nlohmann::json& selected = require_array(j, "selected");
  std::vector<char> seen;
  for (const auto& item : selected) {
    if (!item.is_number_integer()) {
      throw DataError("model selected entries must be integers");
    }
    const auto idx = item.get<long long>();
    if (idx < 0) throw DataError("model selected entries must be >= 0");
    const auto u = static_cast<std::size_t>(idx);
    if (u >= seen.size()) seen.resize(u + 1, 0);
    if (seen[u]) throw DataError("model selected entries must be distinct");
    seen[u] = 1;
    model.selected.push_back(static_cast<int>(idx));
  }
  const nlohmann::json& weights = require_array(j, "weights");
  if (weights.size() != model.selected.size()) {
    throw DataError("model weights and selected must have equal length");
  }
  model.weights.resize(static_cast<Eigen::Index>(weights.size()));
  Eigen::Index w = 0;
  for (const auto& item : weights) {
    if (!item.is_number()) {
      throw DataError("model weights entries must be numbers");
    }
    const double value = item.get<double>();
    if (!std::isfinite(value)) {
      throw DataError("model weights entries must be finite");
    }
    model.weights[w++] = value;
  }
  return model;
}

nlohmann::json trace_to_json(const SelectionTrace& trace, Loss loss) {
  nlohmann::json j;
  j["lambda"] = trace.model.lambda;
  j["loss"] = to_string(loss);
  nlohmann::json steps = nlohmann::json::array();
  for (const SelectionStep& step : trace.steps) {
    steps.push_back({{"feature", step.feature}, {"loo_error", step.loo_error}});
  }
  j["steps"] = std::move(steps);
  j["model"] = to_json(trace.model);
  return j;
}

SelectionTrace trace_from_json(const nlohmann::json& j) {
  SelectionTrace trace;
  trace.model = model_from_json(require_field(j, "model"));
  const double lambda = require_finite_number(j, "lambda");
  if (lambda != trace.model.lambda) {
    throw DataError("trace lambda disagrees with its model lambda");
  }
  const nlohmann::json& loss = require_field(j, "loss");
  if (!loss.is_string()) throw DataError("trace loss must be a string");
  loss_from_string(loss.get<std::string>());  // validates the name
  const nlohmann::json& steps = require_array(j, "steps");
  if (steps.size() != trace.model.selected.size()) {
    throw DataError("trace step count disagrees with its model");
  }
  std::size_t s = 0;
  for (const auto& item : steps) {
    SelectionStep step;
    const nlohmann::json& feature = require_field(item, "feature");
    if (!feature.is_number_integer()) {
      throw DataError("trace step feature must be an integer");
    }
    step.feature = feature.get<int>();
    if (step.feature != trace.model.selected[s]) {
      throw DataError("trace step order disagrees with its model");
    }
    step.loo_error = require_finite_number(item, "loo_error");
    trace.steps.push_back(step);
    ++s;
  }
  return trace;
}

nlohmann::json curve_to_json(const CurveReport& report) {
  nlohmann::json j;
  j["k_values"] = report.k_values;
  j["mean_test_accuracy"] = report.mean_test_accuracy;
  j["mean_loo_accuracy"] = report.mean_loo_accuracy;
  j["lambda_per_fold"] = report.lambda_per_fold;
  nlohmann::json test_rows = nlohmann::json::array();
  nlohmann::json loo_rows = nlohmann::json::array();
  for (Eigen::Index f = 0; f < report.per_fold_test.rows(); ++f) {
    std::vector<double> test_row(static_cast<std::size_t>(
        report.per_fold_test.cols()));
    std::vector<double> loo_row(test_row.size());
    for (Eigen::Index s = 0; s < report.per_fold_test.cols(); ++s) {
      test_row[static_cast<std::size_t>(s)] = report.per_fold_test(f, s);
      loo_row[static_cast<std::size_t>(s)] = report.per_fold_loo(f, s);
    }
    test_rows.push_back(test_row);
    loo_rows.push_back(loo_row);
  }
  j["per_fold_test"] = std::move(test_rows);
  j["per_fold_loo"] = std::move(loo_rows);
  return j;
}

std::string curve_to_csv(const CurveReport& report) {
  std::string out = "fold,k,lambda,test_accuracy,loo_accuracy\n";
  for (Eigen::Index f = 0; f < report.per_fold_test.rows(); ++f) {
    const std::string lambda =
        format_double(report.lambda_per_fold[static_cast<std::size_t>(f)]);
    for (std::size_t s = 0; s < report.k_values.size(); ++s) {
      out += std::to_string(f);
      out += ',';
      out += std::to_string(report.k_values[s]);
      out += ',';
      out += lambda;
      out += ',';
      out += format_double(report.per_fold_test(f, static_cast<Eigen::Index>(s)));
      out += ',';
      out += format_double(report.per_fold_loo(f, static_cast<Eigen::Index>(s)));
      out += '\n';
    }
  }
  return out;
}

nlohmann::json scaling_to_json(const ScalingReport& report) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (const ScalingRow& row : report.rows) {
    rows.push_back({{"algorithm", row.algorithm},
                    {"m", row.m},
                    {"n", row.n},
                    {"k", row.k},
                    {"wall_seconds", row.wall_seconds}});
  }
  j["rows"] = std::move(rows);
  nlohmann::json slopes = nlohmann::json::object();
  for (const auto& [name, slope] : report.slopes) {
    slopes[name] = slope;
  }
  j["slopes"] = std::move(slopes);
  j["notes"] = report.notes;
  return j;
}

std::string scaling_to_csv(const ScalingReport& report) {
  std::string out = "algorithm,m,n,k,wall_seconds\n";
  for (const ScalingRow& row : report.rows) {
    out += row.algorithm;
    out += ',';
    out += std::to_string(row.m);
    out += ',';
    out += std::to_string(row.n);
    out += ',';
    out += std::to_string(row.k);
    out += ',';
    out += format_double(row.wall_seconds);
    out += '\n';
  }
  return out;
}

}  // namespace grls
