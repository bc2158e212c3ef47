#pragma once

// Experiment runner: metrics, grid selections, scenario sweeps and reports.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepmom/datagen.hpp"
#include "deepmom/trainer.hpp"

namespace deepmom::bench {

using data::Dataset;
using nn::NetworkParams;

enum class Scenario {
  RegressionUniformOutliers,
  RegressionTNoise,
  RegressionInputCorruption,
  SpiralLabels,
  SpiralInputs,
  CsvClassification,
};

const char* to_string(Scenario s);
Scenario parse_scenario(const std::string& name);
bool is_regression(Scenario s);

enum class Preset { Desk, Paper };
const char* to_string(Preset p);
Preset parse_preset(const std::string& name);

struct ExperimentConfig {
  Scenario scenario = Scenario::RegressionUniformOutliers;
  // Regression dimensions. Spiral data are fixed at n = 1000, p = 2.
  std::size_t n = 200;
  std::size_t p = 10;
  std::size_t depth = 2;
  std::size_t width = 16;
  double snr = 10.0;
  // Architecture of the fitted networks; regression uses (depth, width).
  std::size_t fit_depth = 2;
  std::size_t fit_width = 16;
  std::vector<double> fractions = {1.0, 0.95, 0.85, 0.75};
  std::vector<double> dfs = {10.0, 1.0};
  std::vector<std::size_t> b_grid = {1, 3, 5, 7, 11, 15};
  std::vector<double> huber_q_grid = {75, 80, 85, 90, 95, 100};
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
  train::TrainConfig train;
  std::string csv_path;
  std::string csv_label = "label";
  bool csv_normalize = true;
  /// Report path prefix: <out>.json and <out>.csv.
  std::string out = "report";

  /// Throws ConfigError with the offending field named.
  void validate() const;
};

ExperimentConfig preset_config(Scenario scenario, Preset preset);

/// Applies `key = value` lines on top of `cfg`. Blank lines and lines
/// starting with '#' are skipped. Unknown keys and bad values throw ConfigError.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);
/// Reads the file and applies it. A `scenario` or `preset` key, if present,
/// first resets cfg to that preset, so it must come before other keys.
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base);

/// Mean squared distance between the generating network and the fit on the
/// given inputs.
double generalization_error(const data::GroundTruth& truth, const NetworkParams& fitted,
                            const nn::Matrix& test_inputs);

/// Fraction of rows whose argmax output equals the label.
double accuracy(const NetworkParams& fitted, const Dataset& test);

struct GridPick {
  double value = 0.0;
  double key = 0.0;
};

/// Smallest value over the grid; ties go to the smallest key. NaN entries
/// never win; an all-NaN grid gives NaN.
GridPick grid_min(std::span<const double> values, std::span<const double> keys);
GridPick mom_min(std::span<const double> errors, std::span<const std::size_t> b_grid);
GridPick huber_min(std::span<const double> errors, std::span<const double> q_grid);

/// ceil(q / 100 * n)-th smallest value, q in (0, 100].
double nearest_rank_percentile(std::span<const double> values, double q);

struct Cell {
  std::string estimator;
  std::vector<double> values;  // one per repetition, NaN on failure
  std::vector<double> chosen;  // selected b or q per repetition (grid estimators)
  double mean = 0.0;           // NaN if any repetition failed
  std::optional<double> scaled;
};

struct Row {
  std::string key;  // informative fraction or df
  std::vector<Cell> cells;
};

struct ResultTable {
  ExperimentConfig config;
  std::string metric;  // "prediction_error" or "accuracy"
  std::optional<double> baseline;
  std::vector<Row> rows;
  std::size_t failed_fits = 0;
};

/// Runs every repetition of every row. Fits are spread over `threads`
/// workers; results are independent of the thread count.
ResultTable run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1,
                           const std::function<void(const std::string&)>& log = {});

std::string report_json(const ResultTable& table);
std::string report_csv(const ResultTable& table);

}  // namespace deepmom::bench
