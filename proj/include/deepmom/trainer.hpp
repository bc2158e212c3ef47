#pragma once

// Two-player stochastic gradient training of the median-of-means min-max
// objective, plain mini-batch SGD baselines, and cross-validated selection
// of the block count.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "deepmom/dataset.hpp"
#include "deepmom/losses.hpp"
#include "deepmom/nn.hpp"

namespace deepmom::train {

using data::Dataset;
using loss::LossKind;
using nn::Architecture;
using nn::NetworkParams;

/// How the second player moves. Its gradient of the objective is minus the
/// mean gradient of its own loss over the median block.
///   SupConsistent: ascend the objective, i.e. descend its own loss.
///   PaperLiteral:  subtract r times the objective gradient, i.e. ascend its
///                  own loss.
enum class Player2Direction { SupConsistent, PaperLiteral };

const char* to_string(Player2Direction d);
Player2Direction parse_direction(const std::string& name);

struct TrainConfig {
  std::size_t blocks = 1;
  double learning_rate = 1e-2;
  double batch_fraction = 0.15;
  std::size_t max_iters = 20000;
  double stop_tol = 1e-2;
  std::uint64_t seed = 0;
  Player2Direction player2_direction = Player2Direction::SupConsistent;
  nn::InitScheme init = nn::InitScheme::scaled_uniform();

  /// floor(batch_fraction * n), at least 1.
  std::size_t batch_size(std::size_t n) const;

  /// Throws ConfigError for out-of-range values or b larger than the batch.
  void validate(std::size_t n) const;
};

enum class StopReason { MaxIters, Player1Step, Player2Step, Diverged };
const char* to_string(StopReason r);

struct TraceRecord {
  std::size_t iteration = 0;    // 1-based
  double objective = 0.0;       // MoM objective (or mean loss) on the batch
  double step1 = 0.0;           // ||p1_{i+1} - p1_i||
  double step2 = 0.0;           // ||p2_{i+1} - p2_i||, 0 when not taken
  std::size_t median_block = 0; // 0-based block used by player 1
};

struct TrainTrace {
  std::vector<TraceRecord> records;
  StopReason stop = StopReason::MaxIters;

  std::size_t iterations() const noexcept { return records.size(); }
};

struct TrainResult {
  NetworkParams params;
  TrainTrace trace;
};

/// Seeds of the two players' initializations, derived from the master seed.
std::uint64_t player1_init_seed(std::uint64_t seed);
std::uint64_t player2_init_seed(std::uint64_t seed);

/// The median-of-means min-max training loop. Per iteration: draw a batch of
/// h samples without replacement, partition it into b blocks, step player 1
/// along minus its objective gradient, stop if that step is <= stop_tol,
/// step player 2 (using the updated player 1), stop if that step is <= stop_tol.
/// Returns player 1.
TrainResult train_mom(const Dataset& data, const Architecture& arch, const LossKind& loss,
                      const TrainConfig& cfg);

/// Mini-batch SGD on the mean loss with the same batch schedule, player-1
/// initialization and stopping rule as train_mom.
TrainResult train_standard(const Dataset& data, const Architecture& arch, const LossKind& loss,
                           const TrainConfig& cfg);

struct BlockScore {
  std::size_t blocks = 0;
  double mean_score = 0.0;
  std::vector<double> fold_scores;
};

struct CvResult {
  std::size_t chosen_blocks = 0;
  std::vector<BlockScore> scores;
};

/// How regression folds are scored. Median resists outliers in the
/// held-out fold; classification always uses the error rate.
enum class CvScoring { Mean, Median };
const char* to_string(CvScoring s);
CvScoring parse_scoring(const std::string& name);

/// Held-out score of a fitted network: mean (or median) squared error for
/// regression, error rate (1 - accuracy) for classification. Lower is better.
double holdout_score(const NetworkParams& params, const Dataset& heldout,
                     CvScoring scoring = CvScoring::Mean);

/// k-fold cross-validation over the block grid. The data are shuffled with a
/// seed derived from cfg.seed and cut into contiguous folds. Every b is
/// trained on the same folds with the same seed. Ties go to the smallest b.
CvResult cross_validate_blocks(const Dataset& data, const Architecture& arch, const LossKind& loss,
                               const std::vector<std::size_t>& b_grid, std::size_t folds,
                               const TrainConfig& cfg, std::size_t threads = 1,
                               CvScoring scoring = CvScoring::Mean);

}  // namespace deepmom::train
