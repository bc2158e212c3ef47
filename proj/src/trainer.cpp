#include "deepmom/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deepmom/errors.hpp"
#include "deepmom/mom.hpp"
#include "deepmom/parallel.hpp"
#include "deepmom/rng.hpp"

namespace deepmom::train {

const char* to_string(Player2Direction d) {
  return d == Player2Direction::SupConsistent ? "sup-consistent" : "paper-literal";
}

Player2Direction parse_direction(const std::string& name) {
  if (name == "sup-consistent") return Player2Direction::SupConsistent;
  if (name == "paper-literal") return Player2Direction::PaperLiteral;
  throw ConfigError("unknown player-2 direction '" + name + "'");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIters: return "max-iters";
    case StopReason::Player1Step: return "player1-step";
    case StopReason::Player2Step: return "player2-step";
    case StopReason::Diverged: return "diverged";
  }
  return "?";
}

std::size_t TrainConfig::batch_size(std::size_t n) const {
  const auto h = static_cast<std::size_t>(std::floor(batch_fraction * static_cast<double>(n) + 1e-9));
  return std::max<std::size_t>(1, std::min(h, n));
}

void TrainConfig::validate(std::size_t n) const {
  if (n == 0) throw ConfigError("training data is empty");
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) throw ConfigError("batch fraction must lie in (0, 1]");
  if (!(learning_rate >= 0.0 && std::isfinite(learning_rate))) throw ConfigError("learning rate must be non-negative");
  if (!(stop_tol >= 0.0 && std::isfinite(stop_tol))) throw ConfigError("stopping tolerance must be non-negative");
  if (max_iters == 0) throw ConfigError("max_iters must be positive");
  if (blocks == 0) throw ConfigError("block count must be positive");
  if (blocks > batch_size(n)) {
    throw ConfigError("block count " + std::to_string(blocks) + " exceeds the batch size " +
                      std::to_string(batch_size(n)));
  }
}

std::uint64_t player1_init_seed(std::uint64_t seed) { return derive_seed(seed, {1}); }
std::uint64_t player2_init_seed(std::uint64_t seed) { return derive_seed(seed, {2}); }

namespace {

std::uint64_t schedule_seed(std::uint64_t seed) { return derive_seed(seed, {3}); }

// Draws batches uniformly without replacement (partial Fisher-Yates over a
// persistent index array) and equipartitions each batch.
class BatchSchedule {
 public:
  BatchSchedule(std::size_t n, std::size_t h, std::size_t b, std::uint64_t seed)
      : h_(h), b_(b), rng_(seed), pool_(n) {
    std::iota(pool_.begin(), pool_.end(), std::size_t{0});
  }

  mom::BlockPartition next() {
    const std::size_t n = pool_.size();
    for (std::size_t k = 0; k < h_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(pool_[k], pool_[pick(rng_)]);
    }
    const std::span<const std::size_t> batch(pool_.data(), h_);
    return mom::equipartition(h_, b_, rng_).remap(batch);
  }

 private:
  std::size_t h_;
  std::size_t b_;
  Rng rng_;
  std::vector<std::size_t> pool_;
};

void check_inputs(const Dataset& data, const Architecture& arch, const LossKind& loss,
                  const TrainConfig& cfg) {
  cfg.validate(data.size());
  arch.validate();
  loss.validate();
  data.validate();
  if (arch.input_dim != data.input_dim() || arch.output_dim != data.output_dim()) {
    throw ShapeError("architecture does not match the data dimensions");
  }
  const bool classification = data.task == data::Task::Classification;
  if (classification != loss.is_classification()) {
    throw ConfigError("loss " + loss::to_string(loss) + " does not match a " + data::to_string(data.task) +
                      " task");
  }
}

}  // namespace

TrainResult train_mom(const Dataset& data, const Architecture& arch, const LossKind& loss,
                      const TrainConfig& cfg) {
  check_inputs(data, arch, loss, cfg);
  NetworkParams p1 = nn::init_params(arch, cfg.init, player1_init_seed(cfg.seed));
  NetworkParams p2 = nn::init_params(arch, cfg.init, player2_init_seed(cfg.seed));
  BatchSchedule schedule(data.size(), cfg.batch_size(data.size()), cfg.blocks, schedule_seed(cfg.seed));
  const double p2_sign = cfg.player2_direction == Player2Direction::SupConsistent ? 1.0 : -1.0;

  TrainTrace trace;
  trace.records.reserve(std::min<std::size_t>(cfg.max_iters, 1 << 16));
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const mom::BlockPartition partition = schedule.next();
    const mom::BlockLosses losses2 = mom::block_losses(partition, data, p2, loss);
    const mom::MedianBlockReport first =
        mom::median_block(mom::increment_means(mom::block_losses(partition, data, p1, loss), losses2));

    TraceRecord rec;
    rec.iteration = it;
    rec.objective = first.median_value;
    rec.median_block = first.median_index;

    const nn::GradientSet g1 = mom::mean_loss_gradient(p1, data, partition.blocks[first.median_index], loss);
    NetworkParams next1 = p1;
    nn::add_scaled(next1, -cfg.learning_rate, g1);
    rec.step1 = nn::param_distance(next1, p1);
    if (!std::isfinite(rec.objective) || !next1.all_finite()) {
      trace.records.push_back(rec);
      trace.stop = StopReason::Diverged;
      break;
    }
    p1 = std::move(next1);
    if (rec.step1 <= cfg.stop_tol) {
      trace.records.push_back(rec);
      trace.stop = StopReason::Player1Step;
      break;
    }

    // Player 2 sees the updated player 1.
    const mom::MedianBlockReport second =
        mom::median_block(mom::increment_means(mom::block_losses(partition, data, p1, loss), losses2));
    // d MoM / d p2 = -g2, so ascent on the objective is descent on L2.
    const nn::GradientSet g2 = mom::mean_loss_gradient(p2, data, partition.blocks[second.median_index], loss);
    NetworkParams next2 = p2;
    nn::add_scaled(next2, -p2_sign * cfg.learning_rate, g2);
    rec.step2 = nn::param_distance(next2, p2);
    trace.records.push_back(rec);
    if (!next2.all_finite()) {
      trace.stop = StopReason::Diverged;
      break;
    }
    p2 = std::move(next2);
    if (rec.step2 <= cfg.stop_tol) {
      trace.stop = StopReason::Player2Step;
      break;
    }
  }
  return {std::move(p1), std::move(trace)};
}

TrainResult train_standard(const Dataset& data, const Architecture& arch, const LossKind& loss,
                           const TrainConfig& cfg) {
  check_inputs(data, arch, loss, cfg);
  NetworkParams params = nn::init_params(arch, cfg.init, player1_init_seed(cfg.seed));
  BatchSchedule schedule(data.size(), cfg.batch_size(data.size()), 1, schedule_seed(cfg.seed));

  TrainTrace trace;
  trace.records.reserve(std::min<std::size_t>(cfg.max_iters, 1 << 16));
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const mom::BlockPartition partition = schedule.next();
    TraceRecord rec;
    rec.iteration = it;
    const nn::GradientSet g = mom::mean_loss_gradient(params, data, partition.blocks[0], loss, &rec.objective);
    NetworkParams next = params;
    nn::add_scaled(next, -cfg.learning_rate, g);
    rec.step1 = nn::param_distance(next, params);
    trace.records.push_back(rec);
    if (!std::isfinite(rec.objective) || !next.all_finite()) {
      trace.stop = StopReason::Diverged;
      break;
    }
    params = std::move(next);
    if (rec.step1 <= cfg.stop_tol) {
      trace.stop = StopReason::Player1Step;
      break;
    }
  }
  return {std::move(params), std::move(trace)};
}

const char* to_string(CvScoring s) { return s == CvScoring::Mean ? "mean" : "median"; }

CvScoring parse_scoring(const std::string& name) {
  if (name == "mean") return CvScoring::Mean;
  if (name == "median") return CvScoring::Median;
  throw ConfigError("unknown CV scoring '" + name + "'");
}

double holdout_score(const NetworkParams& params, const Dataset& heldout, CvScoring scoring) {
  if (heldout.size() == 0) throw DomainError("empty held-out set");
  const nn::Matrix out = nn::forward_all(params, heldout.inputs);
  std::vector<double> per_sample(heldout.size());
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    if (heldout.task == data::Task::Regression) {
      const double r = heldout.y(i)[0] - out(i, 0);
      per_sample[i] = r * r;
    } else {
      per_sample[i] = data::argmax(out.row(i)) == heldout.label(i) ? 0.0 : 1.0;
    }
  }
  if (scoring == CvScoring::Median && heldout.task == data::Task::Regression) {
    // Lower median, as for the block objective.
    const auto mid = per_sample.begin() + static_cast<std::ptrdiff_t>((per_sample.size() - 1) / 2);
    std::nth_element(per_sample.begin(), mid, per_sample.end());
    return *mid;
  }
  double total = 0.0;
  for (double v : per_sample) total += v;
  return total / static_cast<double>(heldout.size());
}

CvResult cross_validate_blocks(const Dataset& data, const Architecture& arch, const LossKind& loss,
                               const std::vector<std::size_t>& b_grid, std::size_t folds,
                               const TrainConfig& cfg, std::size_t threads, CvScoring scoring) {
  const std::size_t n = data.size();
  if (folds < 2 || folds > n) throw ConfigError("fold count must lie in [2, n]");
  if (b_grid.empty()) throw ConfigError("block grid is empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, {4}));
  std::shuffle(order.begin(), order.end(), rng);

  auto fold_begin = [&](std::size_t k) { return k * n / folds; };
  std::size_t min_train = n;
  for (std::size_t k = 0; k < folds; ++k) min_train = std::min(min_train, n - (fold_begin(k + 1) - fold_begin(k)));
  for (std::size_t b : b_grid) {
    TrainConfig probe = cfg;
    probe.blocks = b;
    probe.validate(min_train);
  }

  std::vector<Dataset> train_sets;
  std::vector<Dataset> held_sets;
  for (std::size_t k = 0; k < folds; ++k) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> held_rows;
    for (std::size_t i = 0; i < n; ++i) {
      const bool held = i >= fold_begin(k) && i < fold_begin(k + 1);
      (held ? held_rows : train_rows).push_back(order[i]);
    }
    train_sets.push_back(data.subset(train_rows));
    held_sets.push_back(data.subset(held_rows));
  }

  std::vector<double> scores(b_grid.size() * folds);
  parallel_for(scores.size(), threads, [&](std::size_t task) {
    const std::size_t bi = task / folds;
    const std::size_t k = task % folds;
    TrainConfig run = cfg;
    run.blocks = b_grid[bi];
    run.seed = derive_seed(cfg.seed, {5, k});
    const TrainResult fit = train_mom(train_sets[k], arch, loss, run);
    scores[task] = holdout_score(fit.params, held_sets[k], scoring);
  });

  CvResult result;
  for (std::size_t bi = 0; bi < b_grid.size(); ++bi) {
    BlockScore s;
    s.blocks = b_grid[bi];
    s.fold_scores.assign(scores.begin() + static_cast<std::ptrdiff_t>(bi * folds),
                         scores.begin() + static_cast<std::ptrdiff_t>((bi + 1) * folds));
    double total = 0.0;
    for (double v : s.fold_scores) total += v;
    s.mean_score = total / static_cast<double>(folds);
    result.scores.push_back(std::move(s));
  }
  // Non-finite scores (diverged fits) never win.
  const BlockScore* best = nullptr;
  for (const auto& s : result.scores) {
    if (!std::isfinite(s.mean_score)) continue;
    if (best == nullptr || s.mean_score < best->mean_score ||
        (s.mean_score == best->mean_score && s.blocks < best->blocks)) {
      best = &s;
    }
  }
  result.chosen_blocks = best != nullptr ? best->blocks
                                         : *std::min_element(b_grid.begin(), b_grid.end());
  return result;
}

}  // namespace deepmom::train
