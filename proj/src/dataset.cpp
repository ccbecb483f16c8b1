#include "grls/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "grls/errors.hpp"
#include "grls/text_io.hpp"

namespace grls {

namespace {

// std::from_chars does not accept a leading '+', which is common in LibSVM
// labels; strip it before parsing.
bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_int(std::string_view token, long& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path + "'");
  return in;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1) {
    throw DataError("dataset must have at least one feature and one example");
  }
  if (labels.size() != features.cols()) {
    throw DataError("label count (" + std::to_string(labels.size()) +
                    ") does not match example count (" +
                    std::to_string(features.cols()) + ")");
  }
  if (!features.allFinite()) {
    throw DataError("feature matrix contains a non-finite value");
  }
  if (!labels.allFinite()) {
    throw DataError("label vector contains a non-finite value");
  }
  if (!feature_names.empty() &&
      static_cast<Index>(feature_names.size()) != features.rows()) {
    throw DataError("feature name count does not match feature count");
  }
}

std::vector<std::vector<int>> FoldAssignment::fold_indices() const {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(n_folds));
  for (std::size_t j = 0; j < fold_of_example.size(); ++j) {
    groups.at(static_cast<std::size_t>(fold_of_example[j]))
        .push_back(static_cast<int>(j));
  }
  return groups;
}

Dataset load_libsvm(const std::string& path, std::optional<Index> n_features) {
  std::ifstream in = open_or_throw(path);
  struct Entry {
    Index feature;
    Index example;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<double> labels;
  Index max_feature = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body(line);
    if (const std::size_t hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    const auto tokens = split_whitespace(body);
    if (tokens.empty()) continue;
    const std::string where = "'" + path + "' line " + std::to_string(line_no);
    double label = 0.0;
    if (!parse_double(tokens[0], label) || !std::isfinite(label)) {
      throw DataError(where + ": malformed label '" + std::string(tokens[0]) +
                      "'");
    }
    const Index example = static_cast<Index>(labels.size());
    labels.push_back(label);
    long prev_index = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const std::size_t colon = tok.find(':');
      long idx = 0;
      double value = 0.0;
      if (colon == std::string_view::npos ||
          !parse_int(tok.substr(0, colon), idx) ||
          !parse_double(tok.substr(colon + 1), value)) {
        throw DataError(where + ": malformed entry '" + std::string(tok) +
                        "' (expected index:value)");
      }
      if (idx < 1) {
        throw DataError(where + ": feature index " + std::to_string(idx) +
                        " is not 1-based");
      }
      if (idx <= prev_index) {
        throw DataError(where + ": feature indices must be strictly increasing");
      }
      if (!std::isfinite(value)) {
        throw DataError(where + ": non-finite value in entry '" +
                        std::string(tok) + "'");
      }
      if (n_features && idx > static_cast<long>(*n_features)) {
        throw DataError(where + ": feature index " + std::to_string(idx) +
                        " exceeds declared feature count " +
                        std::to_string(*n_features));
      }
      prev_index = idx;
      entries.push_back({static_cast<Index>(idx - 1), example, value});
      max_feature = std::max(max_feature, static_cast<Index>(idx));
    }
  }
  if (labels.empty()) {
    throw DataError("'" + path + "' contains no examples");
  }
  const Index n = n_features.value_or(max_feature);
  if (n < 1) {
    throw DataError("'" + path + "' declares no features");
  }
  Dataset data;
  data.features = FeatureMatrix::Zero(n, static_cast<Index>(labels.size()));
  data.labels =
      Eigen::Map<const Eigen::VectorXd>(labels.data(),
                                        static_cast<Index>(labels.size()));
  for (const Entry& e : entries) {
    data.features(e.feature, e.example) = e.value;
  }
  data.validate();
  return data;
}

void save_libsvm(const Dataset& data, const std::string& path) {
  data.validate();
  std::string out;
  for (Index j = 0; j < data.n_examples(); ++j) {
    out += format_double(data.labels[j]);
    for (Index i = 0; i < data.n_features(); ++i) {
      const double v = data.features(i, j);
      if (v != 0.0) {
        out += ' ';
        out += std::to_string(i + 1);
        out += ':';
        out += format_double(v);
      }
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("'" + path + "' is empty");
  }
  std::vector<std::string> header;
  for (std::string_view tok : split(trim(line), ',')) {
    header.emplace_back(trim(tok));
  }
  std::size_t label_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) {
      label_idx = c;
      break;
    }
  }
  if (label_idx == header.size()) {
    long as_index = -1;
    if (parse_int(label_column, as_index) && as_index >= 0 &&
        as_index < static_cast<long>(header.size())) {
      label_idx = static_cast<std::size_t>(as_index);
    } else {
      throw DataError("'" + path + "': label column '" + label_column +
                      "' not found in header");
    }
  }
  if (header.size() < 2) {
    throw DataError("'" + path + "' has no feature columns");
  }
  std::vector<std::vector<double>> rows;  // example-major, features only
  std::vector<double> labels;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto cells = split(body, ',');
    if (cells.size() != header.size()) {
      throw DataError("'" + path + "' row " + std::to_string(line_no) +
                      ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double value = 0.0;
      if (!parse_double(trim(cells[c]), value) || !std::isfinite(value)) {
        throw DataError("'" + path + "' row " + std::to_string(line_no) +
                        ", column '" + header[c] + "': cannot parse '" +
                        std::string(trim(cells[c])) + "' as a finite number");
      }
      if (c == label_idx) {
        labels.push_back(value);
      } else {
        row.push_back(value);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw DataError("'" + path + "' contains no data rows");
  }
  Dataset data;
  const Index n = static_cast<Index>(header.size() - 1);
  const Index m = static_cast<Index>(rows.size());
  data.features.resize(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      data.features(i, j) = rows[static_cast<std::size_t>(j)]
                                [static_cast<std::size_t>(i)];
    }
  }
  data.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), m);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) data.feature_names.push_back(header[c]);
  }
  data.validate();
  return data;
}

Dataset synth_two_gaussians(Index n_examples, Index n_features,
                            Index n_informative, double separation,
                            std::uint64_t seed) {
  if (n_examples < 2 || n_examples % 2 != 0) {
    throw DataError("synth_two_gaussians: example count must be even and >= 2");
  }
  if (n_features < 1 || n_informative < 1 || n_informative > n_features) {
    throw DataError(
        "synth_two_gaussians: need 1 <= n_informative <= n_features");
  }
  if (!std::isfinite(separation)) {
    throw DataError("synth_two_gaussians: separation must be finite");
  }
  Dataset data;
  data.labels.resize(n_examples);
  const Index half = n_examples / 2;
  for (Index j = 0; j < n_examples; ++j) {
    data.labels[j] = j < half ? 1.0 : -1.0;
  }
  data.features.resize(n_features, n_examples);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double shift = separation / 2.0;
  // Row-major fill matches storage order.
  for (Index i = 0; i < n_features; ++i) {
    const bool informative = i < n_informative;
    for (Index j = 0; j < n_examples; ++j) {
      double v = noise(rng);
      if (informative) v += data.labels[j] > 0 ? shift : -shift;
      data.features(i, j) = v;
    }
  }
  return data;
}

FoldAssignment stratified_folds(const Eigen::VectorXd& labels, int n_folds,
                                std::uint64_t seed) {
  if (n_folds < 2) {
    throw DataError("stratified_folds: need at least 2 folds");
  }
  const Index m = labels.size();
  if (m < n_folds) {
    throw DataError("stratified_folds: fewer examples (" + std::to_string(m) +
                    ") than folds (" + std::to_string(n_folds) + ")");
  }
  bool binary = true;
  for (Index j = 0; j < m; ++j) {
    if (labels[j] != 1.0 && labels[j] != -1.0) {
      binary = false;
      break;
    }
  }
  std::mt19937_64 rng(seed);
  FoldAssignment folds;
  folds.n_folds = n_folds;
  folds.fold_of_example.assign(static_cast<std::size_t>(m), 0);
  auto deal = [&](std::vector<int>& members) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      folds.fold_of_example[static_cast<std::size_t>(members[pos])] =
          static_cast<int>(pos % static_cast<std::size_t>(n_folds));
    }
  };
  if (binary) {
    // Class order is fixed (-1 then +1) so the assignment is deterministic.
    for (const double cls : {-1.0, 1.0}) {
      std::vector<int> members;
      for (Index j = 0; j < m; ++j) {
        if (labels[j] == cls) members.push_back(static_cast<int>(j));
      }
      if (members.empty()) continue;
      if (static_cast<int>(members.size()) < n_folds) {
        throw DataError("stratified_folds: class " + std::to_string(cls) +
                        " has only " + std::to_string(members.size()) +
                        " examples, fewer than " + std::to_string(n_folds) +
                        " folds; cannot stratify");
      }
      deal(members);
    }
  } else {
    std::vector<int> members(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) members[static_cast<std::size_t>(j)] = static_cast<int>(j);
    deal(members);
  }
  return folds;
}

Dataset subset_examples(const Dataset& data, const std::vector<int>& examples) {
  if (examples.empty()) {
    throw DataError("subset_examples: empty example list");
  }
  Dataset out;
  out.feature_names = data.feature_names;
  out.features.resize(data.n_features(), static_cast<Index>(examples.size()));
  out.labels.resize(static_cast<Index>(examples.size()));
  for (std::size_t t = 0; t < examples.size(); ++t) {
    const int j = examples[t];
    if (j < 0 || j >= data.n_examples()) {
      throw DataError("subset_examples: example index " + std::to_string(j) +
                      " out of range");
    }
    out.features.col(static_cast<Index>(t)) = data.features.col(j);
    out.labels[static_cast<Index>(t)] = data.labels[j];
  }
  return out;
}

FeatureMatrix select_feature_rows(const FeatureMatrix& features,
                                  const std::vector<int>& rows) {
  FeatureMatrix out(static_cast<Index>(rows.size()), features.cols());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const int i = rows[t];
    if (i < 0 || i >= features.rows()) {
      throw DataError("feature index " + std::to_string(i) + " out of range");
    }
    out.row(static_cast<Index>(t)) = features.row(i);
  }
  return out;
}

void binarize_labels(Dataset& data, double positive_label) {
  for (Index j = 0; j < data.labels.size(); ++j) {
    data.labels[j] = data.labels[j] == positive_label ? 1.0 : -1.0;
  }
}

void append_bias_feature(Dataset& data) {
  const Index n = data.n_features();
  data.features.conservativeResize(n + 1, Eigen::NoChange);
  data.features.row(n).setOnes();
  if (!data.feature_names.empty()) {
    data.feature_names.emplace_back("bias");
  }
}

FeatureScaler FeatureScaler::fit(const FeatureMatrix& features) {
  const Index n = features.rows();
  const Index m = features.cols();
  if (m < 1) throw DataError("FeatureScaler: no examples");
  FeatureScaler s;
  s.offset.resize(n);
  s.scale.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double mean = features.row(i).mean();
    const double var =
        (features.row(i).array() - mean).square().sum() / static_cast<double>(m);
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      s.offset[i] = mean;
      s.scale[i] = sd;
    } else {
      s.offset[i] = 0.0;
      s.scale[i] = 1.0;
    }
  }
  return s;
}

void FeatureScaler::apply(FeatureMatrix& features) const {
  if (features.rows() != offset.size()) {
    throw DataError("FeatureScaler: feature count mismatch");
  }
  features.colwise() -= offset;
  features.array().colwise() /= scale.array();
}

}  // namespace grls
