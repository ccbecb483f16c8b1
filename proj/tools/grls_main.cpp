// Command-line front end: feature selection, prediction, cross-validated
// accuracy curves, and runtime scaling benchmarks as reproducible batch jobs.
//
// Exit codes: 0 success, 1 invalid flags/usage, 2 data error, 3 numerical
// failure. Output files are written atomically (temp file + rename); when
// --out is omitted, results go to stdout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grls/baselines.hpp"
#include "grls/dataset.hpp"
#include "grls/errors.hpp"
#include "grls/evaluation.hpp"
#include "grls/greedy.hpp"
#include "grls/loss.hpp"
#include "grls/rls_core.hpp"
#include "grls/selection.hpp"
#include "grls/serialization.hpp"
#include "grls/text_io.hpp"
#include "grls/version.hpp"

namespace {

using grls::Dataset;
using grls::Index;

struct InputFlags {
  std::string path;
  std::string format = "libsvm";
  std::string label_column = "label";
  bool label_column_set = false;
  long long declared_features = -1;
  bool add_bias = false;
  double positive_class = 1.0;
  bool positive_class_set = false;
};

// Attaches the shared input flags to a subcommand.
void add_input_flags(CLI::App* cmd, InputFlags& flags) {
  cmd->add_option("--in", flags.path, "Input data file")->required();
  cmd->add_option("--format", flags.format, "Input format")
      ->check(CLI::IsMember({"libsvm", "csv"}))
      ->capture_default_str();
  cmd->add_option("--label-col", flags.label_column,
                  "CSV label column (header name, or 0-based index)")
      ->capture_default_str();
  cmd->add_option("--n-features", flags.declared_features,
                  "Declared feature count for libsvm input")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--add-bias", flags.add_bias,
                "Append a constant-1 bias feature after loading");
  cmd->add_option("--positive-class", flags.positive_class,
                  "Map labels equal to this value to +1 and all others to -1");
}

// Flag combinations are checked before any data is touched.
void validate_input_flags(const CLI::App& cmd, InputFlags& flags) {
  flags.label_column_set = cmd.count("--label-col") > 0;
  flags.positive_class_set = cmd.count("--positive-class") > 0;
  if (flags.label_column_set && flags.format != "csv") {
    throw CLI::ValidationError("--label-col requires --format csv");
  }
  if (cmd.count("--n-features") > 0 && flags.format != "libsvm") {
    throw CLI::ValidationError("--n-features requires --format libsvm");
  }
}

Dataset load_input(const InputFlags& flags) {
  Dataset data;
  if (flags.format == "csv") {
    data = grls::load_csv(flags.path, flags.label_column);
  } else {
    std::optional<Index> declared;
    if (flags.declared_features > 0) declared = flags.declared_features;
    data = grls::load_libsvm(flags.path, declared);
  }
  if (flags.positive_class_set) {
    grls::binarize_labels(data, flags.positive_class);
  }
  if (flags.add_bias) grls::append_bias_feature(data);
  return data;
}

nlohmann::json input_config(const InputFlags& flags) {
  nlohmann::json j;
  j["in"] = flags.path;
  j["format"] = flags.format;
  if (flags.format == "csv") j["label_col"] = flags.label_column;
  if (flags.declared_features > 0) j["n_features"] = flags.declared_features;
  j["add_bias"] = flags.add_bias;
  if (flags.positive_class_set) j["positive_class"] = flags.positive_class;
  return j;
}

// "pow2:LO:HI" for {2^LO..2^HI}, or an explicit comma list of values.
std::vector<double> parse_grid(const std::string& text) {
  if (text.rfind("pow2:", 0) == 0) {
    const std::string range = text.substr(5);
    const std::size_t colon = range.find(':');
    if (colon == std::string::npos) {
      throw CLI::ValidationError("--grid expects pow2:LO:HI");
    }
    int lo = 0;
    int hi = 0;
    try {
      std::size_t used = 0;
      lo = std::stoi(range.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("trailing text");
      const std::string rest = range.substr(colon + 1);
      hi = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw CLI::ValidationError("--grid expects integer exponents");
    }
    if (lo > hi) throw CLI::ValidationError("--grid exponents out of order");
    return grls::pow2_grid(lo, hi);
  }
  std::vector<double> grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token =
        text.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    try {
      std::size_t used = 0;
      const double value = std::stod(token, &used);
      if (used != token.size() || !(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument("bad value");
      }
      grid.push_back(value);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--grid expects positive numbers: '" + token +
                                 "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (grid.empty()) throw CLI::ValidationError("--grid is empty");
  return grid;
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    grls::write_file_atomic(out_path, content);
  }
}

std::string dump_report(nlohmann::json j) {
  return j.dump(2) + "\n";
}

constexpr const char* kCsvSchemaLine = "# schema_version=1\n";

nlohmann::json report_shell(const char* subcommand) {
  nlohmann::json j;
  j["schema_version"] = grls::kSchemaVersion;
  j["version"] = grls::kVersion;
  j["config"] = {{"subcommand", subcommand}};
  return j;
}

struct SelectFlags {
  InputFlags input;
  std::string algorithm = "greedy";
  double lambda = 1.0;
  int k = 0;
  std::string loss = "squared";
  std::uint64_t seed = 0;
  int threads = 1;
  int debug_recompute_interval = 0;
  std::string out;
};

int run_select(const SelectFlags& flags) {
  const grls::SelectorKind kind = grls::selector_from_string(flags.algorithm);
  const grls::Loss loss = grls::loss_from_string(flags.loss);
  const Dataset data = load_input(flags.input);

  grls::SelectionTrace trace;
  switch (kind) {
    case grls::SelectorKind::greedy: {
      grls::GreedyOptions options;
      options.threads = flags.threads;
      options.debug_recompute_interval = flags.debug_recompute_interval;
      trace = grls::select_greedy(data, flags.lambda, flags.k, loss, options);
      break;
    }
    case grls::SelectorKind::lowrank:
      trace = grls::select_lowrank(data, flags.lambda, flags.k, loss);
      break;
    case grls::SelectorKind::wrapper:
      trace = grls::select_wrapper(data, flags.lambda, flags.k, loss);
      break;
    case grls::SelectorKind::random: {
      std::vector<int> order(static_cast<std::size_t>(data.n_features()));
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(flags.seed);
      std::shuffle(order.begin(), order.end(), rng);
      const int k_eff =
          std::min<int>(flags.k, static_cast<int>(data.n_features()));
      order.resize(static_cast<std::size_t>(k_eff));
      trace = grls::select_forced_order(data, flags.lambda, order, loss);
      break;
    }
  }

  nlohmann::json j = report_shell("select");
  j["config"].update(input_config(flags.input));
  j["config"]["algorithm"] = flags.algorithm;
  j["config"]["lambda"] = flags.lambda;
  j["config"]["k"] = flags.k;
  j["config"]["loss"] = flags.loss;
  j["config"]["threads"] = flags.threads;
  if (kind == grls::SelectorKind::random) j["config"]["seed"] = flags.seed;
  if (flags.debug_recompute_interval > 0) {
    j["config"]["debug_recompute_interval"] = flags.debug_recompute_interval;
  }
  j["trace"] = grls::trace_to_json(trace, loss);
  emit(dump_report(std::move(j)), flags.out);
  return 0;
}

struct PredictFlags {
  InputFlags input;
  std::string model_path;
  double threshold = 0.0;
  bool threshold_set = false;
  std::string out;
};

int run_predict(const PredictFlags& flags) {
  const std::string model_text = grls::read_file(flags.model_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(model_text);
  } catch (const nlohmann::json::exception& e) {
    throw grls::DataError("cannot parse model JSON from '" + flags.model_path +
                          "': " + e.what());
  }
  // Accept a bare model, a trace, or a full select report wrapping a trace.
  if (j.is_object() && j.contains("trace")) j = j.at("trace");
  if (j.is_object() && j.contains("model")) j = j.at("model");
  const grls::RlsModel model = grls::model_from_json(j);

  const Dataset data = load_input(flags.input);
  const Eigen::VectorXd predictions = grls::predict(model, data.features);

  std::string csv{kCsvSchemaLine};
  csv += flags.threshold_set ? "prediction,label\n" : "prediction\n";
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    csv += grls::format_double(predictions[i]);
    if (flags.threshold_set) {
      csv += predictions[i] > flags.threshold ? ",1" : ",-1";
    }
    csv += '\n';
  }
  emit(csv, flags.out);
  return 0;
}

struct CvFlags {
  InputFlags input;
  std::string algorithm = "greedy";
  int k = 0;
  std::string loss = "squared";
  int folds = 10;
  std::uint64_t seed = 0;
  std::string grid = "pow2:-15:15";
  bool standardize = false;
  int threads = 1;
  std::string out;
  std::string csv_out;
};

int run_cv(const CvFlags& flags) {
  const grls::SelectorKind kind = grls::selector_from_string(flags.algorithm);
  const grls::Loss loss = grls::loss_from_string(flags.loss);
  const std::vector<double> grid = parse_grid(flags.grid);
  const Dataset data = load_input(flags.input);
  const grls::FoldAssignment folds =
      grls::stratified_folds(data.labels, flags.folds, flags.seed);

  grls::CvOptions options;
  options.standardize = flags.standardize;
  options.threads = flags.threads;
  grls::CurveReport report;
  if (kind == grls::SelectorKind::random) {
    report = grls::random_baseline(data, flags.k, flags.seed, folds, grid,
                                   loss, options);
  } else {
    report =
        grls::cv_feature_curve(data, flags.k, folds, grid, kind, loss, options);
  }

  nlohmann::json j = report_shell("cv");
  j["config"].update(input_config(flags.input));
  j["config"]["algorithm"] = flags.algorithm;
  j["config"]["k"] = flags.k;
  j["config"]["loss"] = flags.loss;
  j["config"]["folds"] = flags.folds;
  j["config"]["seed"] = flags.seed;
  j["config"]["grid"] = flags.grid;
  j["config"]["standardize"] = flags.standardize;
  j["config"]["threads"] = flags.threads;
  j["report"] = grls::curve_to_json(report);
  emit(dump_report(std::move(j)), flags.out);
  if (!flags.csv_out.empty()) {
    grls::write_file_atomic(flags.csv_out,
                            kCsvSchemaLine + grls::curve_to_csv(report));
  }
  return 0;
}

struct BenchmarkFlags {
  std::vector<long long> m_values;
  long long n = 1000;
  int k = 10;
  std::vector<std::string> algorithms{"greedy"};
  double lambda = 1.0;
  std::string loss = "squared";
  int repeats = 3;
  std::uint64_t seed = 0;
  long long lowrank_max_m = 5000;
  int threads = 1;
  std::string out;
  std::string csv_out;
};

int run_benchmark(const BenchmarkFlags& flags) {
  std::vector<grls::SelectorKind> algorithms;
  for (const std::string& name : flags.algorithms) {
    algorithms.push_back(grls::selector_from_string(name));
  }
  const grls::Loss loss = grls::loss_from_string(flags.loss);
  std::vector<Index> m_values(flags.m_values.begin(), flags.m_values.end());

  grls::BenchmarkOptions options;
  options.repeats = flags.repeats;
  options.lambda = flags.lambda;
  options.loss = loss;
  options.threads = flags.threads;
  const grls::ScalingReport report = grls::scaling_benchmark(
      m_values, flags.n, flags.k, algorithms, flags.seed, options);

  nlohmann::json j = report_shell("benchmark");
  j["config"]["m"] = flags.m_values;
  j["config"]["n"] = flags.n;
  j["config"]["k"] = flags.k;
  j["config"]["algorithms"] = flags.algorithms;
  j["config"]["lambda"] = flags.lambda;
  j["config"]["loss"] = flags.loss;
  j["config"]["repeats"] = flags.repeats;
  j["config"]["seed"] = flags.seed;
  j["config"]["threads"] = flags.threads;
  j["report"] = grls::scaling_to_json(report);
  emit(dump_report(std::move(j)), flags.out);
  if (!flags.csv_out.empty()) {
    grls::write_file_atomic(flags.csv_out,
                            kCsvSchemaLine + grls::scaling_to_csv(report));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized least-squares feature selection with exact "
               "leave-one-out shortcuts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(grls::kVersion));

  SelectFlags select_flags;
  PredictFlags predict_flags;
  CvFlags cv_flags;
  BenchmarkFlags benchmark_flags;

  CLI::App* select = app.add_subcommand(
      "select", "Run feature selection and write a selection trace (JSON)");
  add_input_flags(select, select_flags.input);
  select->add_option("--algorithm", select_flags.algorithm, "Selector")
      ->check(CLI::IsMember({"greedy", "lowrank", "wrapper", "random"}))
      ->capture_default_str();
  select->add_option("--lambda", select_flags.lambda, "Regularization")
      ->required()
      ->check(CLI::PositiveNumber);
  select->add_option("--k", select_flags.k, "Number of features to select")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  select->add_option("--loss", select_flags.loss, "Selection criterion loss")
      ->check(CLI::IsMember({"squared", "zero_one"}))
      ->capture_default_str();
  select->add_option("--seed", select_flags.seed,
                     "Seed for --algorithm random")
      ->capture_default_str();
  select
      ->add_option("--threads", select_flags.threads,
                   "Candidate-scan threads (greedy only)")
      ->envname("GRLS_THREADS")
      ->check(CLI::PositiveNumber);
  select->add_option("--debug-recompute-interval",
                     select_flags.debug_recompute_interval,
                     "Verify greedy state from scratch every N commits")
      ->check(CLI::NonNegativeNumber);
  select->add_option("--out", select_flags.out,
                     "Output path (stdout when omitted)");

  CLI::App* predict = app.add_subcommand(
      "predict", "Apply a trained model to a data file, write CSV");
  add_input_flags(predict, predict_flags.input);
  predict->add_option("--model", predict_flags.model_path,
                      "Model JSON (bare model, trace, or select output)")
      ->required();
  predict->add_option("--threshold", predict_flags.threshold,
                      "Also emit +/-1 labels using this decision threshold");
  predict->add_option("--out", predict_flags.out,
                      "Output path (stdout when omitted)");

  CLI::App* cv = app.add_subcommand(
      "cv", "Cross-validated accuracy-vs-k curve for a selector (JSON)");
  add_input_flags(cv, cv_flags.input);
  cv->add_option("--algorithm", cv_flags.algorithm, "Selector")
      ->check(CLI::IsMember({"greedy", "lowrank", "wrapper", "random"}))
      ->capture_default_str();
  cv->add_option("--k", cv_flags.k, "Curve length (features per fold)")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  cv->add_option("--loss", cv_flags.loss, "Selection criterion loss")
      ->check(CLI::IsMember({"squared", "zero_one"}))
      ->capture_default_str();
  cv->add_option("--folds", cv_flags.folds, "Stratified fold count")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000000));
  cv->add_option("--seed", cv_flags.seed, "Seed for folds (and random draws)")
      ->capture_default_str();
  cv->add_option("--grid", cv_flags.grid,
                 "Lambda grid: pow2:LO:HI or comma-separated values")
      ->capture_default_str();
  cv->add_flag("--standardize", cv_flags.standardize,
               "Standardize features with training-fold statistics");
  cv->add_option("--threads", cv_flags.threads,
                 "Candidate-scan threads (greedy only)")
      ->envname("GRLS_THREADS")
      ->check(CLI::PositiveNumber);
  cv->add_option("--out", cv_flags.out, "Output path (stdout when omitted)");
  cv->add_option("--csv", cv_flags.csv_out, "Also write tidy CSV rows here");

  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Time selection across training-set sizes (JSON)");
  benchmark
      ->add_option("--m", benchmark_flags.m_values,
                   "Training-set sizes, comma separated")
      ->required()
      ->delimiter(',');
  benchmark->add_option("--n", benchmark_flags.n, "Feature count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  benchmark->add_option("--k", benchmark_flags.k, "Features to select")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  benchmark
      ->add_option("--algorithms", benchmark_flags.algorithms,
                   "Algorithms to time, comma separated")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::IsMember({"greedy", "lowrank", "wrapper"}));
  benchmark->add_option("--lambda", benchmark_flags.lambda, "Regularization")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  benchmark->add_option("--loss", benchmark_flags.loss, "Criterion loss")
      ->check(CLI::IsMember({"squared", "zero_one"}))
      ->capture_default_str();
  benchmark
      ->add_option("--repeats", benchmark_flags.repeats,
                   "Runs per cell; the median is reported")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  benchmark->add_option("--seed", benchmark_flags.seed, "Data generator seed")
      ->capture_default_str();
  benchmark
      ->add_option("--lowrank-max-m", benchmark_flags.lowrank_max_m,
                   "Refuse lowrank runs above this m (memory guard)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  benchmark
      ->add_option("--threads", benchmark_flags.threads,
                   "Candidate-scan threads (greedy only)")
      ->envname("GRLS_THREADS")
      ->check(CLI::PositiveNumber);
  benchmark->add_option("--out", benchmark_flags.out,
                        "Output path (stdout when omitted)");
  benchmark->add_option("--csv", benchmark_flags.csv_out,
                        "Also write tidy CSV rows here");

  try {
    app.parse(argc, argv);
    // Cross-flag validation happens here, before any file is opened.
    if (select->parsed()) validate_input_flags(*select, select_flags.input);
    if (predict->parsed()) {
      validate_input_flags(*predict, predict_flags.input);
      predict_flags.threshold_set = predict->count("--threshold") > 0;
    }
    if (cv->parsed()) validate_input_flags(*cv, cv_flags.input);
    if (benchmark->parsed()) {
      if (benchmark_flags.m_values.empty()) {
        throw CLI::ValidationError("--m needs at least one size");
      }
      for (const long long m : benchmark_flags.m_values) {
        if (m < 2) throw CLI::ValidationError("--m sizes must be >= 2");
      }
      bool wants_lowrank = false;
      for (const std::string& name : benchmark_flags.algorithms) {
        if (name == "lowrank") wants_lowrank = true;
      }
      if (wants_lowrank) {
        for (const long long m : benchmark_flags.m_values) {
          if (m > benchmark_flags.lowrank_max_m) {
            throw CLI::ValidationError(
                "lowrank at m=" + std::to_string(m) + " exceeds the memory "
                "guard (--lowrank-max-m " +
                std::to_string(benchmark_flags.lowrank_max_m) +
                "); raise the guard or drop lowrank");
          }
        }
      }
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (select->parsed()) return run_select(select_flags);
    if (predict->parsed()) return run_predict(predict_flags);
    if (cv->parsed()) return run_cv(cv_flags);
    if (benchmark->parsed()) return run_benchmark(benchmark_flags);
    std::cerr << "usage error: no subcommand given\n";
    return 1;
  } catch (const grls::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const grls::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
