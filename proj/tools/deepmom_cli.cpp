#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deepmom/bench.hpp"
#include "deepmom/datagen.hpp"
#include "deepmom/errors.hpp"
#include "deepmom/rng.hpp"
#include "deepmom/trainer.hpp"

using namespace deepmom;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kPartial = 4 };

struct TrainFlags {
  std::size_t blocks = 1;
  double learning_rate = 1e-2;
  double batch_fraction = 0.15;
  std::size_t max_iters = 20000;
  double stop_tol = 1e-2;
  std::string direction = "sup-consistent";
  std::size_t depth = 2;
  std::size_t width = 16;

  void add_to(CLI::App& app) {
    app.add_option("--lr", learning_rate, "Learning rate")->capture_default_str();
    app.add_option("--batch-fraction", batch_fraction, "Batch size as a fraction of n")->capture_default_str();
    app.add_option("--iters", max_iters, "Maximum number of iterations")->capture_default_str();
    app.add_option("--tol", stop_tol, "Stop when a player's step norm is at most this")->capture_default_str();
    app.add_option("--direction", direction, "Player-2 direction: sup-consistent | paper-literal")
        ->capture_default_str();
    app.add_option("--depth", depth, "Hidden layers of the fitted network")->capture_default_str();
    app.add_option("--width", width, "Width of every hidden layer")->capture_default_str();
  }

  train::TrainConfig config(std::uint64_t seed) const {
    train::TrainConfig cfg;
    cfg.blocks = blocks;
    cfg.learning_rate = learning_rate;
    cfg.batch_fraction = batch_fraction;
    cfg.max_iters = max_iters;
    cfg.stop_tol = stop_tol;
    cfg.seed = seed;
    cfg.player2_direction = train::parse_direction(direction);
    return cfg;
  }
};

data::Task parse_task(const std::string& name) {
  if (name == "regression") return data::Task::Regression;
  if (name == "classification") return data::Task::Classification;
  throw ConfigError("unknown task '" + name + "'");
}

// Column names written by `generate`.
std::string resolve_label(const std::string& label, const std::string& task) {
  if (!label.empty()) return label;
  return task == "classification" ? "label" : "y";
}

std::string default_loss(data::Task task) { return task == data::Task::Regression ? "se" : "sce"; }

int run_generate(const std::string& scenario_name, const std::string& preset_name, double frac, double df,
                 std::uint64_t seed, const std::string& out) {
  const auto scenario = bench::parse_scenario(scenario_name);
  const auto cfg = bench::preset_config(scenario, bench::parse_preset(preset_name));
  const std::uint64_t data_seed = derive_seed(seed, {1});
  const std::uint64_t corrupt_seed = derive_seed(seed, {2});
  data::Dataset ds;
  if (bench::is_regression(scenario)) {
    const auto gen = data::gen_regression(cfg.n, cfg.p, cfg.depth, cfg.width, cfg.snr, data_seed);
    switch (scenario) {
      case bench::Scenario::RegressionUniformOutliers:
        ds = data::corrupt_outputs_uniform(gen.data, gen.truth, frac, corrupt_seed);
        break;
      case bench::Scenario::RegressionTNoise:
        ds = data::corrupt_outputs_student_t(gen.data, gen.truth, df, corrupt_seed);
        break;
      default:
        ds = data::corrupt_inputs(gen.data, frac, corrupt_seed);
    }
  } else if (scenario == bench::Scenario::CsvClassification) {
    throw ConfigError("csv-classification reads data; it does not generate any");
  } else {
    const auto spiral = data::gen_spiral(data_seed).data;
    ds = scenario == bench::Scenario::SpiralLabels ? data::corrupt_labels(spiral, frac, corrupt_seed)
                                                   : data::corrupt_inputs(spiral, frac, corrupt_seed);
  }
  data::write_csv(ds, out);
  std::printf("wrote %zu rows x %zu features to %s (%zu informative)\n", ds.size(), ds.input_dim(), out.c_str(),
              ds.informative_count());
  return kOk;
}

int run_train(const std::string& path, const std::string& label, const std::string& task_name,
              std::optional<std::string> loss_name, double huber_k, const std::string& test_path,
              bool standard, const TrainFlags& flags, std::uint64_t seed) {
  const auto task = parse_task(task_name);
  const auto loss = loss::parse_loss(loss_name.value_or(default_loss(task)), huber_k);
  data::Dataset train_set = data::load_csv(path, label, task);
  data::Dataset test_set;
  if (!test_path.empty()) {
    test_set = data::load_csv(test_path, label, task);
  } else {
    auto split = data::split_half(train_set);
    train_set = std::move(split.train);
    test_set = std::move(split.test);
  }
  const auto arch =
      nn::Architecture::uniform(train_set.input_dim(), train_set.output_dim(), flags.depth, flags.width);
  const auto cfg = flags.config(seed);
  const auto fit = standard ? train::train_standard(train_set, arch, loss, cfg)
                            : train::train_mom(train_set, arch, loss, cfg);
  const auto& last = fit.trace.records.back();
  std::printf("loss            %s\n", loss::to_string(loss).c_str());
  std::printf("trainer         %s\n", standard ? "standard" : "median-of-means");
  if (!standard) std::printf("blocks          %zu\n", cfg.blocks);
  std::printf("iterations      %zu\n", fit.trace.iterations());
  std::printf("stop            %s\n", train::to_string(fit.trace.stop));
  std::printf("final objective %.6g\n", last.objective);
  const double score = train::holdout_score(fit.params, test_set);
  if (task == data::Task::Regression) std::printf("test mse        %.6g\n", score);
  else std::printf("test accuracy   %.4f\n", 1.0 - score);
  return fit.trace.stop == train::StopReason::Diverged ? kPartial : kOk;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

int run_cv(const std::string& path, const std::string& label, const std::string& task_name,
           std::optional<std::string> loss_name, double huber_k, const std::vector<std::size_t>& b_grid,
           std::size_t folds, const std::string& scoring, const TrainFlags& flags, std::uint64_t seed,
           std::size_t threads) {
  const auto task = parse_task(task_name);
  const auto loss = loss::parse_loss(loss_name.value_or(default_loss(task)), huber_k);
  const auto ds = data::load_csv(path, label, task);
  const auto arch = nn::Architecture::uniform(ds.input_dim(), ds.output_dim(), flags.depth, flags.width);
  const auto cv = train::cross_validate_blocks(ds, arch, loss, b_grid, folds, flags.config(seed), threads,
                                               train::parse_scoring(scoring));
  std::printf("b grid  %s\n", join(b_grid).c_str());
  for (const auto& s : cv.scores) std::printf("b=%-4zu score %.6g\n", s.blocks, s.mean_score);
  std::printf("chosen  %zu\n", cv.chosen_blocks);
  return kOk;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << body;
}

int run_bench(const std::string& config_path, const std::string& scenario_name, const std::string& preset_name,
              std::optional<std::uint64_t> seed, std::optional<std::string> out, std::size_t threads, bool quiet) {
  auto cfg = bench::preset_config(bench::parse_scenario(scenario_name), bench::parse_preset(preset_name));
  if (!config_path.empty()) cfg = bench::load_config(config_path, cfg);
  if (seed) cfg.seed = *seed;
  if (out) cfg.out = *out;
  std::function<void(const std::string&)> log;
  if (!quiet) log = [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
  const auto table = bench::run_experiment(cfg, threads, log);
  write_file(cfg.out + ".json", bench::report_json(table));
  write_file(cfg.out + ".csv", bench::report_csv(table));
  std::cout << bench::report_csv(table);
  std::printf("wrote %s.json and %s.csv\n", cfg.out.c_str(), cfg.out.c_str());
  if (table.failed_fits > 0) {
    std::fprintf(stderr, "%zu fits failed and were recorded as NaN\n", table.failed_fits);
    return kPartial;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Median-of-means training of ReLU networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "deepmom 0.1.0");

  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string scenario = "regression-uniform-outliers";
  std::string preset = "desk";

  auto* gen = app.add_subcommand("generate", "Write a generated (and corrupted) dataset to CSV");
  double frac = 1.0;
  double df = 1.0;
  std::string gen_out = "data.csv";
  gen->add_option("--scenario", scenario, "Data kind and corruption")->capture_default_str();
  gen->add_option("--preset", preset, "Dimensions: desk | paper")->capture_default_str();
  gen->add_option("--frac", frac, "Informative fraction")->capture_default_str();
  gen->add_option("--df", df, "Student-t degrees of freedom (t-noise only)")->capture_default_str();
  gen->add_option("--seed", seed, "Master seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV path")->capture_default_str();

  std::string data_path;
  std::string label;
  std::string task = "regression";
  std::optional<std::string> loss_name;
  double huber_k = 1.0;
  TrainFlags flags;

  auto* tr = app.add_subcommand("train", "Fit one network on a CSV file and print final metrics");
  std::string test_path;
  tr->add_option("--data", data_path, "Training CSV")->required();
  tr->add_option("--label", label, "Label column name (default y or label by task)");
  tr->add_option("--task", task, "regression | classification")->capture_default_str();
  tr->add_option("--loss", loss_name, "se | ad | huber | sce (default se or sce by task)");
  tr->add_option("--huber-k", huber_k, "Huber threshold")->capture_default_str();
  tr->add_option("--blocks", flags.blocks, "Number of median-of-means blocks")->capture_default_str();
  tr->add_option("--test", test_path, "Held-out CSV (default: second half of --data)");
  bool standard = false;
  tr->add_flag("--standard", standard, "Plain mini-batch SGD on the mean loss");
  tr->add_option("--seed", seed, "Master seed")->capture_default_str();
  flags.add_to(*tr);

  auto* cv = app.add_subcommand("cv", "Choose the block count by k-fold cross-validation");
  std::vector<std::size_t> b_grid = {1, 3, 5, 7, 9, 11};
  std::size_t folds = 10;
  std::string scoring = "mean";
  cv->add_option("--data", data_path, "CSV file")->required();
  cv->add_option("--label", label, "Label column name (default y or label by task)");
  cv->add_option("--task", task, "regression | classification")->capture_default_str();
  cv->add_option("--loss", loss_name, "se | ad | huber | sce (default se or sce by task)");
  cv->add_option("--huber-k", huber_k, "Huber threshold")->capture_default_str();
  cv->add_option("--b-grid", b_grid, "Candidate block counts")->delimiter(',')->capture_default_str();
  cv->add_option("--folds", folds, "Number of folds")->capture_default_str();
  cv->add_option("--scoring", scoring, "Regression fold score: mean | median")->capture_default_str();
  cv->add_option("--seed", seed, "Master seed")->capture_default_str();
  cv->add_option("--threads", threads, "Worker threads")->capture_default_str();
  flags.add_to(*cv);

  auto* be = app.add_subcommand("bench", "Run a full scenario sweep and write JSON and CSV reports");
  std::string config_path;
  std::optional<std::uint64_t> bench_seed;
  std::optional<std::string> bench_out;
  bool quiet = false;
  be->add_option("--config", config_path, "key = value config file applied on top of the preset");
  be->add_option("--scenario", scenario, "Scenario")->capture_default_str();
  be->add_option("--preset", preset, "desk | paper")->capture_default_str();
  be->add_option("--seed", bench_seed, "Master seed (overrides the config file)");
  be->add_option("--out", bench_out, "Report prefix (overrides the config file)");
  be->add_option("--threads", threads, "Worker threads")->capture_default_str();
  be->add_flag("--quiet", quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return run_generate(scenario, preset, frac, df, seed, gen_out);
    if (*tr) return run_train(data_path, resolve_label(label, task), task, loss_name, huber_k, test_path, standard, flags, seed);
    if (*cv) {
      return run_cv(data_path, resolve_label(label, task), task, loss_name, huber_k, b_grid, folds, scoring, flags, seed, threads);
    }
    if (*be) return run_bench(config_path, scenario, preset, bench_seed, bench_out, threads, quiet);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  }
  return kOk;
}
