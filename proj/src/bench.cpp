#include "deepmom/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deepmom/errors.hpp"
#include "deepmom/parallel.hpp"
#include "deepmom/rng.hpp"

#ifndef DEEPMOM_VERSION
#define DEEPMOM_VERSION "unknown"
#endif

namespace deepmom::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ScenarioName {
  Scenario scenario;
  const char* name;
};

constexpr ScenarioName kScenarios[] = {
    {Scenario::RegressionUniformOutliers, "regression-uniform-outliers"},
    {Scenario::RegressionTNoise, "regression-t-noise"},
    {Scenario::RegressionInputCorruption, "regression-input-corruption"},
    {Scenario::SpiralLabels, "spiral-labels"},
    {Scenario::SpiralInputs, "spiral-inputs"},
    {Scenario::CsvClassification, "csv-classification"},
};

}  // namespace

const char* to_string(Scenario s) {
  for (const auto& e : kScenarios) {
    if (e.scenario == s) return e.name;
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  for (const auto& e : kScenarios) {
    if (name == e.name) return e.scenario;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

bool is_regression(Scenario s) {
  return s == Scenario::RegressionUniformOutliers || s == Scenario::RegressionTNoise ||
         s == Scenario::RegressionInputCorruption;
}

const char* to_string(Preset p) { return p == Preset::Desk ? "desk" : "paper"; }

Preset parse_preset(const std::string& name) {
  if (name == "desk") return Preset::Desk;
  if (name == "paper") return Preset::Paper;
  throw ConfigError("unknown preset '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (repetitions == 0) throw ConfigError("repetitions must be at least 1");
  if (b_grid.empty()) throw ConfigError("b_grid is empty");
  if (is_regression(scenario) && huber_q_grid.empty()) throw ConfigError("huber_q_grid is empty");
  if (scenario == Scenario::RegressionTNoise) {
    if (dfs.empty()) throw ConfigError("dfs is empty");
    for (double df : dfs) {
      if (!(df > 0.0)) throw ConfigError("dfs entries must be positive");
    }
  } else {
    if (fractions.empty()) throw ConfigError("fractions is empty");
    for (double f : fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractions entries must lie in (0, 1]");
    }
  }
  for (double q : huber_q_grid) {
    if (!(q > 0.0 && q <= 100.0)) throw ConfigError("huber_q_grid entries must lie in (0, 100]");
  }
  if (fit_width == 0 && fit_depth > 0) throw ConfigError("fit_width must be positive");
  if (is_regression(scenario)) {
    if (n < 2 || n % 2 != 0) throw ConfigError("n must be even and at least 2");
    if (p == 0 || (depth > 0 && width == 0)) throw ConfigError("regression dimensions must be positive");
    if (!(snr > 0.0)) throw ConfigError("snr must be positive");
  }
  if (scenario == Scenario::CsvClassification && csv_path.empty()) {
    throw ConfigError("csv-classification needs csv_path");
  }
  // Every b must fit in the batch drawn from the training half.
  const std::size_t n_train = is_regression(scenario)                     ? n / 2
                              : scenario == Scenario::CsvClassification ? 0
                                                                         : data::kSpiralClasses * data::kSpiralClassSize / 2;
  if (n_train > 0) {
    for (std::size_t b : b_grid) {
      train::TrainConfig probe = train;
      probe.blocks = b;
      probe.validate(n_train);
    }
  }
}

ExperimentConfig preset_config(Scenario scenario, Preset preset) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.train.learning_rate = 1e-2;
  cfg.train.batch_fraction = 0.15;
  cfg.train.max_iters = 20000;
  cfg.train.stop_tol = preset == Preset::Paper ? 1e-2 : 1e-4;
  if (is_regression(scenario)) {
    if (preset == Preset::Desk) {
      cfg.n = 200;
      cfg.p = 10;
      cfg.depth = 2;
      cfg.width = 16;
      cfg.b_grid = {1, 3, 5, 7, 11, 15};
      cfg.repetitions = 5;
    } else {
      cfg.n = 2000;
      cfg.p = 50;
      cfg.depth = 7;
      cfg.width = 30;
      cfg.b_grid = {1, 21, 41, 61, 81, 101, 121};
      cfg.repetitions = 20;
    }
    cfg.fit_depth = cfg.depth;
    cfg.fit_width = cfg.width;
  } else {
    cfg.b_grid = {1, 3, 5, 7, 9, 11};
    cfg.fit_depth = 2;
    if (preset == Preset::Desk) {
      cfg.fit_width = 64;
      cfg.train.learning_rate = 0.3;
      cfg.repetitions = 3;
    } else {
      cfg.fit_width = 150;
      cfg.repetitions = 20;
    }
  }
  return cfg;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("bad value '" + t + "' for " + key);
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw ConfigError(key + " is empty");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError("bad value '" + t + "' for " + key);
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "scenario") cfg.scenario = parse_scenario(trim(value));
  else if (key == "n") cfg.n = parse_number<std::size_t>(key, value);
  else if (key == "p") cfg.p = parse_number<std::size_t>(key, value);
  else if (key == "depth") cfg.depth = parse_number<std::size_t>(key, value);
  else if (key == "width") cfg.width = parse_number<std::size_t>(key, value);
  else if (key == "snr") cfg.snr = parse_number<double>(key, value);
  else if (key == "fit_depth") cfg.fit_depth = parse_number<std::size_t>(key, value);
  else if (key == "fit_width") cfg.fit_width = parse_number<std::size_t>(key, value);
  else if (key == "fractions") cfg.fractions = parse_list<double>(key, value);
  else if (key == "dfs") cfg.dfs = parse_list<double>(key, value);
  else if (key == "b_grid") cfg.b_grid = parse_list<std::size_t>(key, value);
  else if (key == "huber_q_grid") cfg.huber_q_grid = parse_list<double>(key, value);
  else if (key == "repetitions") cfg.repetitions = parse_number<std::size_t>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "learning_rate") cfg.train.learning_rate = parse_number<double>(key, value);
  else if (key == "batch_fraction") cfg.train.batch_fraction = parse_number<double>(key, value);
  else if (key == "max_iters") cfg.train.max_iters = parse_number<std::size_t>(key, value);
  else if (key == "stop_tol") cfg.train.stop_tol = parse_number<double>(key, value);
  else if (key == "player2_direction") cfg.train.player2_direction = train::parse_direction(trim(value));
  else if (key == "csv_path") cfg.csv_path = trim(value);
  else if (key == "csv_label") cfg.csv_label = trim(value);
  else if (key == "csv_normalize") cfg.csv_normalize = parse_bool(key, value);
  else if (key == "out") cfg.out = trim(value);
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<Preset> preset;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "preset") {
      preset = parse_preset(value);
      cfg = preset_config(cfg.scenario, *preset);
    } else if (key == "scenario") {
      const Scenario s = parse_scenario(value);
      if (s != cfg.scenario) cfg = preset_config(s, preset.value_or(Preset::Desk));
    } else {
      apply_key(cfg, key, value);
    }
  }
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = base;
  apply_config_text(cfg, ss.str());
  return cfg;
}

double generalization_error(const data::GroundTruth& truth, const NetworkParams& fitted,
                            const nn::Matrix& test_inputs) {
  if (truth.params.architecture().output_dim != 1 || fitted.architecture().output_dim != 1) {
    throw DomainError("generalization error needs scalar regression outputs");
  }
  if (test_inputs.rows() == 0) throw DomainError("empty test set");
  const nn::Matrix a = nn::forward_all(truth.params, test_inputs);
  const nn::Matrix b = nn::forward_all(fitted, test_inputs);
  double sum = 0.0;
  for (std::size_t i = 0; i < test_inputs.rows(); ++i) {
    const double d = a(i, 0) - b(i, 0);
    sum += d * d;
  }
  return sum / static_cast<double>(test_inputs.rows());
}

double accuracy(const NetworkParams& fitted, const Dataset& test) {
  if (test.task != data::Task::Classification) throw DomainError("accuracy needs a classification set");
  return 1.0 - train::holdout_score(fitted, test);
}

GridPick grid_min(std::span<const double> values, std::span<const double> keys) {
  if (values.empty()) throw ConfigError("empty grid");
  if (values.size() != keys.size()) throw ShapeError("grid values and keys differ in length");
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::isnan(values[k])) continue;
    if (!best || values[k] < values[*best] || (values[k] == values[*best] && keys[k] < keys[*best])) best = k;
  }
  if (!best) return {kNaN, kNaN};
  return {values[*best], keys[*best]};
}

GridPick mom_min(std::span<const double> errors, std::span<const std::size_t> b_grid) {
  std::vector<double> keys(b_grid.begin(), b_grid.end());
  return grid_min(errors, keys);
}

GridPick huber_min(std::span<const double> errors, std::span<const double> q_grid) {
  return grid_min(errors, q_grid);
}

double nearest_rank_percentile(std::span<const double> values, double q) {
  if (values.empty()) throw DomainError("percentile of an empty sample");
  if (!(q > 0.0 && q <= 100.0)) throw DomainError("percentile rank must lie in (0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(sorted.size()) - 1e-9));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

namespace {

enum class Estimator { Mom, Ad, Huber, Se, Sce };

// One (row, repetition) dataset pair.
struct Instance {
  Dataset train;
  Dataset test;
  std::optional<data::GroundTruth> truth;
  std::vector<double> huber_k;
};

struct FitTask {
  std::size_t instance;
  Estimator estimator;
  std::size_t grid_index;
};

struct RowSpec {
  std::string key;
  double value;  // fraction or df; NaN for the clean baseline row
};

std::string format_key(double v, bool df) {
  char buf[32];
  std::snprintf(buf, sizeof buf, df ? "%g" : "%.2f", v);
  return buf;
}

std::vector<RowSpec> row_specs(const ExperimentConfig& cfg) {
  std::vector<RowSpec> rows;
  if (cfg.scenario == Scenario::RegressionTNoise) {
    // Scaling needs MoM on uncorrupted data, which this table has no row for.
    rows.push_back({"clean", kNaN});
    for (double df : cfg.dfs) rows.push_back({format_key(df, true), df});
  } else {
    for (double f : cfg.fractions) rows.push_back({format_key(f, false), f});
  }
  return rows;
}

std::uint64_t rep_seed(const ExperimentConfig& cfg, std::size_t rep, std::uint64_t stream) {
  return derive_seed(cfg.seed, {100, rep, stream});
}

struct CleanSplit {
  Dataset train;
  Dataset test;
  std::optional<data::GroundTruth> truth;
};

CleanSplit clean_split(const ExperimentConfig& cfg, std::size_t rep, const Dataset* csv) {
  const std::uint64_t seed = rep_seed(cfg, rep, 1);
  if (is_regression(cfg.scenario)) {
    auto gen = data::gen_regression(cfg.n, cfg.p, cfg.depth, cfg.width, cfg.snr, seed);
    auto split = data::split_half(gen.data);
    return {std::move(split.train), std::move(split.test), std::move(gen.truth)};
  }
  if (cfg.scenario == Scenario::CsvClassification) {
    std::vector<std::size_t> order(csv->size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto split = data::split_half(csv->subset(order));
    return {std::move(split.train), std::move(split.test), std::nullopt};
  }
  auto split = data::split_half(data::gen_spiral(seed).data);
  return {std::move(split.train), std::move(split.test), std::nullopt};
}

Dataset corrupt(const ExperimentConfig& cfg, const CleanSplit& clean, const RowSpec& row, std::uint64_t seed) {
  if (std::isnan(row.value)) return clean.train;
  switch (cfg.scenario) {
    case Scenario::RegressionUniformOutliers:
      return data::corrupt_outputs_uniform(clean.train, *clean.truth, row.value, seed);
    case Scenario::RegressionTNoise:
      return data::corrupt_outputs_student_t(clean.train, *clean.truth, row.value, seed);
    case Scenario::RegressionInputCorruption:
    case Scenario::SpiralInputs:
      return data::corrupt_inputs(clean.train, row.value, seed);
    case Scenario::SpiralLabels:
    case Scenario::CsvClassification:
      return data::corrupt_labels(clean.train, row.value, seed);
  }
  return clean.train;
}

std::vector<std::string> roster(Scenario s) {
  if (is_regression(s)) return {"MoM_min", "AD", "Huber_min", "SE"};
  return {"MoM_min", "SCE"};
}

double mean_or_nan(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) {
    if (std::isnan(x)) return kNaN;
    sum += x;
  }
  return sum / static_cast<double>(v.size());
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg, std::size_t threads,
                           const std::function<void(const std::string&)>& log) {
  cfg.validate();
  const bool regression = is_regression(cfg.scenario);

  std::optional<Dataset> csv;
  if (cfg.scenario == Scenario::CsvClassification) {
    csv = data::load_csv(cfg.csv_path, cfg.csv_label, data::Task::Classification, cfg.csv_normalize);
    ExperimentConfig probe = cfg;
    for (std::size_t b : cfg.b_grid) {
      probe.train.blocks = b;
      probe.train.validate(csv->size() / 2);
    }
  }

  const std::vector<RowSpec> rows = row_specs(cfg);
  std::vector<Instance> instances;
  instances.reserve(rows.size() * cfg.repetitions);
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    const CleanSplit clean = clean_split(cfg, rep, csv ? &*csv : nullptr);
    for (const auto& row : rows) {
      Instance inst;
      inst.train = corrupt(cfg, clean, row, rep_seed(cfg, rep, 2));
      inst.test = clean.test;
      inst.truth = clean.truth;
      if (regression) {
        std::vector<double> abs_y(inst.train.size());
        for (std::size_t i = 0; i < inst.train.size(); ++i) abs_y[i] = std::abs(inst.train.y(i)[0]);
        for (double q : cfg.huber_q_grid) inst.huber_k.push_back(nearest_rank_percentile(abs_y, q));
      }
      instances.push_back(std::move(inst));
    }
  }
  // instances are ordered (rep, row); index = rep * rows + row.
  auto instance_index = [&](std::size_t row, std::size_t rep) { return rep * rows.size() + row; };

  std::vector<FitTask> tasks;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    for (std::size_t g = 0; g < cfg.b_grid.size(); ++g) tasks.push_back({k, Estimator::Mom, g});
    if (regression) {
      tasks.push_back({k, Estimator::Ad, 0});
      for (std::size_t g = 0; g < cfg.huber_q_grid.size(); ++g) tasks.push_back({k, Estimator::Huber, g});
      tasks.push_back({k, Estimator::Se, 0});
    } else {
      tasks.push_back({k, Estimator::Sce, 0});
    }
  }

  const nn::Architecture arch = nn::Architecture::uniform(
      instances.front().train.input_dim(), instances.front().train.output_dim(), cfg.fit_depth, cfg.fit_width);
  std::vector<double> metric(tasks.size(), kNaN);
  std::atomic<std::size_t> done{0};
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    const FitTask& task = tasks[t];
    const Instance& inst = instances[task.instance];
    const std::size_t rep = task.instance / rows.size();
    train::TrainConfig tc = cfg.train;
    tc.seed = rep_seed(cfg, rep, 3);
    try {
      train::TrainResult fit;
      switch (task.estimator) {
        case Estimator::Mom:
          tc.blocks = cfg.b_grid[task.grid_index];
          fit = train::train_mom(inst.train, arch, regression ? loss::LossKind::se() : loss::LossKind::sce(), tc);
          break;
        case Estimator::Ad:
          fit = train::train_standard(inst.train, arch, loss::LossKind::ad(), tc);
          break;
        case Estimator::Huber:
          fit = train::train_standard(inst.train, arch, loss::LossKind::huber(inst.huber_k[task.grid_index]), tc);
          break;
        case Estimator::Se:
          fit = train::train_standard(inst.train, arch, loss::LossKind::se(), tc);
          break;
        case Estimator::Sce:
          fit = train::train_standard(inst.train, arch, loss::LossKind::sce(), tc);
          break;
      }
      if (fit.trace.stop != train::StopReason::Diverged) {
        metric[t] = regression ? generalization_error(*inst.truth, fit.params, inst.test.inputs)
                               : accuracy(fit.params, inst.test);
      }
    } catch (const std::exception&) {
      // Recorded as NaN; the sweep goes on.
    }
    const std::size_t finished = ++done;
    if (log && (finished % 10 == 0 || finished == tasks.size())) {
      log(std::to_string(finished) + "/" + std::to_string(tasks.size()) + " fits");
    }
  });

  ResultTable table;
  table.config = cfg;
  table.metric = regression ? "prediction_error" : "accuracy";
  for (double m : metric) {
    if (std::isnan(m)) ++table.failed_fits;
  }

  // Tasks were generated per instance in a fixed order; walk them the same way.
  std::vector<std::size_t> first_task(instances.size());
  for (std::size_t t = tasks.size(); t-- > 0;) first_task[tasks[t].instance] = t;

  const auto names = roster(cfg.scenario);
  const std::vector<double> b_keys(cfg.b_grid.begin(), cfg.b_grid.end());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Row row;
    row.key = rows[r].key;
    for (const auto& name : names) row.cells.push_back({name, {}, {}, 0.0, std::nullopt});
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      std::size_t t = first_task[instance_index(r, rep)];
      std::vector<double> mom(metric.begin() + static_cast<std::ptrdiff_t>(t),
                              metric.begin() + static_cast<std::ptrdiff_t>(t + cfg.b_grid.size()));
      t += cfg.b_grid.size();
      if (regression) {
        const GridPick m = grid_min(mom, b_keys);
        row.cells[0].values.push_back(m.value);
        row.cells[0].chosen.push_back(m.key);
        row.cells[1].values.push_back(metric[t++]);
        std::vector<double> hub(metric.begin() + static_cast<std::ptrdiff_t>(t),
                                metric.begin() + static_cast<std::ptrdiff_t>(t + cfg.huber_q_grid.size()));
        t += cfg.huber_q_grid.size();
        const GridPick h = huber_min(hub, cfg.huber_q_grid);
        row.cells[2].values.push_back(h.value);
        row.cells[2].chosen.push_back(h.key);
        row.cells[3].values.push_back(metric[t++]);
      } else {
        // Highest accuracy = lowest error rate.
        for (double& a : mom) a = 1.0 - a;
        const GridPick m = grid_min(mom, b_keys);
        row.cells[0].values.push_back(1.0 - m.value);
        row.cells[0].chosen.push_back(m.key);
        row.cells[1].values.push_back(metric[t++]);
      }
    }
    for (auto& cell : row.cells) cell.mean = mean_or_nan(cell.values);
    table.rows.push_back(std::move(row));
  }

  if (regression) {
    // MoM_min at 100% informative data; the t-noise table has its own clean row.
    const Row* base = nullptr;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (std::isnan(rows[r].value) || (cfg.scenario != Scenario::RegressionTNoise && rows[r].value == 1.0)) {
        base = &table.rows[r];
        break;
      }
    }
    if (base != nullptr) {
      const double b = base->cells[0].mean;
      table.baseline = b;
      for (auto& row : table.rows) {
        for (auto& cell : row.cells) cell.scaled = cell.mean / b;
      }
    }
  }
  return table;
}

namespace {

using ojson = nlohmann::ordered_json;

// Fixed 10 significant digits; non-finite values become the string "NaN".
ojson number(double v) {
  if (!std::isfinite(v)) return "NaN";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

ojson numbers(const std::vector<double>& v) {
  ojson out = ojson::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

ojson config_json(const ExperimentConfig& cfg) {
  ojson c;
  c["scenario"] = to_string(cfg.scenario);
  if (is_regression(cfg.scenario)) {
    c["n"] = cfg.n;
    c["p"] = cfg.p;
    c["depth"] = cfg.depth;
    c["width"] = cfg.width;
    c["snr"] = number(cfg.snr);
  }
  c["fit_depth"] = cfg.fit_depth;
  c["fit_width"] = cfg.fit_width;
  if (cfg.scenario == Scenario::RegressionTNoise) c["dfs"] = numbers(cfg.dfs);
  else c["fractions"] = numbers(cfg.fractions);
  c["b_grid"] = cfg.b_grid;
  if (is_regression(cfg.scenario)) c["huber_q_grid"] = numbers(cfg.huber_q_grid);
  c["repetitions"] = cfg.repetitions;
  c["seed"] = cfg.seed;
  c["learning_rate"] = number(cfg.train.learning_rate);
  c["batch_fraction"] = number(cfg.train.batch_fraction);
  c["max_iters"] = cfg.train.max_iters;
  c["stop_tol"] = number(cfg.train.stop_tol);
  c["player2_direction"] = train::to_string(cfg.train.player2_direction);
  if (cfg.scenario == Scenario::CsvClassification) {
    c["csv_path"] = cfg.csv_path;
    c["csv_label"] = cfg.csv_label;
    c["csv_normalize"] = cfg.csv_normalize;
  }
  return c;
}

}  // namespace

std::string report_json(const ResultTable& table) {
  ojson j;
  j["software"] = {{"name", "deepmom"}, {"version", DEEPMOM_VERSION}};
  j["seed"] = table.config.seed;
  j["scenario"] = to_string(table.config.scenario);
  j["metric"] = table.metric;
  j["config"] = config_json(table.config);
  if (table.baseline) {
    j["baseline"] = {{"estimator", "MoM_min"},
                     {"row", table.config.scenario == Scenario::RegressionTNoise ? "clean" : "1.00"},
                     {"value", number(*table.baseline)}};
  } else {
    j["baseline"] = nullptr;
  }
  j["failed_fits"] = table.failed_fits;
  ojson rows = ojson::array();
  for (const auto& row : table.rows) {
    ojson r;
    r["key"] = row.key;
    ojson cells = ojson::array();
    for (const auto& cell : row.cells) {
      ojson c;
      c["estimator"] = cell.estimator;
      c["mean"] = number(cell.mean);
      if (cell.scaled) c["scaled"] = number(*cell.scaled);
      c["values"] = numbers(cell.values);
      if (!cell.chosen.empty()) c["chosen"] = numbers(cell.chosen);
      cells.push_back(std::move(c));
    }
    r["cells"] = std::move(cells);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_csv(const ResultTable& table) {
  std::string out = table.config.scenario == Scenario::RegressionTNoise ? "df" : "informative_fraction";
  if (!table.rows.empty()) {
    for (const auto& cell : table.rows.front().cells) out += "," + cell.estimator;
  }
  out += "\n";
  for (const auto& row : table.rows) {
    out += row.key;
    for (const auto& cell : row.cells) {
      const double v = cell.scaled.value_or(cell.mean);
      char buf[40];
      if (std::isfinite(v)) std::snprintf(buf, sizeof buf, "%.6f", v);
      else std::snprintf(buf, sizeof buf, "NaN");
      out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace deepmom::bench
