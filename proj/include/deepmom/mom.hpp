#pragma once

// Median-of-means machinery: block equipartitions, per-block means of the
// loss increment between two parameter sets, median-block selection, and
// the gradients of the resulting objective in each argument.
//
// Block and sample indices are 0-based throughout.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deepmom/dataset.hpp"
#include "deepmom/losses.hpp"
#include "deepmom/nn.hpp"
#include "deepmom/rng.hpp"

namespace deepmom::mom {

using data::Dataset;
using loss::LossKind;
using nn::GradientSet;
using nn::NetworkParams;

/// Disjoint index blocks covering {0, ..., m-1}. The first b-1 blocks hold
/// floor(m/b) indices each; the last block takes the remainder.
struct BlockPartition {
  std::vector<std::vector<std::size_t>> blocks;

  std::size_t count() const noexcept { return blocks.size(); }
  std::size_t total() const noexcept;

  /// Replaces every index i by rows[i].
  BlockPartition remap(std::span<const std::size_t> rows) const;
};

/// Splits `order` into b consecutive blocks following the size rule.
BlockPartition equipartition(std::span<const std::size_t> order, std::size_t b);

/// Random equipartition of {0, ..., m-1}: a uniform permutation drawn from
/// `rng`, then split by the size rule. Throws DomainError unless 1 <= b <= m.
BlockPartition equipartition(std::size_t m, std::size_t b, Rng& rng);
BlockPartition equipartition(std::size_t m, std::size_t b, std::uint64_t seed);

struct MedianBlockReport {
  std::vector<double> block_means;
  double median_value = 0.0;
  std::size_t median_index = 0;
};

/// Selects max{P_k : P_k <= Q}, where Q is the ceil(b/2)-th smallest entry
/// (the lower median). Ties go to the smallest block index.
MedianBlockReport median_block(std::span<const double> block_means);

/// Per-sample loss of `params` on each listed row, in order.
std::vector<double> sample_losses(const NetworkParams& params, const Dataset& data,
                                  std::span<const std::size_t> rows, const LossKind& loss);

/// Losses of one player grouped by block.
using BlockLosses = std::vector<std::vector<double>>;
BlockLosses block_losses(const BlockPartition& partition, const Dataset& data,
                         const NetworkParams& params, const LossKind& loss);

/// (1/|B_k|) sum_{i in B_k} (loss1_i - loss2_i) for every block k.
std::vector<double> increment_means(const BlockLosses& loss1, const BlockLosses& loss2);

double block_increment_mean(std::span<const std::size_t> block, const Dataset& data,
                            const NetworkParams& p1, const NetworkParams& p2, const LossKind& loss);

MedianBlockReport median_block_report(const BlockPartition& partition, const Dataset& data,
                                      const NetworkParams& p1, const NetworkParams& p2,
                                      const LossKind& loss);

/// Median of the block increment means.
double mom_objective(const BlockPartition& partition, const Dataset& data, const NetworkParams& p1,
                     const NetworkParams& p2, const LossKind& loss);

/// (1/|rows|) sum over rows of the per-sample loss gradient. Samples are
/// accumulated in the given order. When `mean_loss` is non-null it receives
/// the mean loss over the same rows.
GradientSet mean_loss_gradient(const NetworkParams& params, const Dataset& data,
                               std::span<const std::size_t> rows, const LossKind& loss,
                               double* mean_loss = nullptr);

/// Gradient of the objective in its first argument: the mean loss gradient
/// of p1 over the median block.
GradientSet mom_gradient_player1(const BlockPartition& partition, const Dataset& data,
                                 const NetworkParams& p1, const NetworkParams& p2,
                                 const LossKind& loss);

/// Gradient of the objective in its second argument: minus the mean loss
/// gradient of p2 over the median block.
GradientSet mom_gradient_player2(const BlockPartition& partition, const Dataset& data,
                                 const NetworkParams& p1, const NetworkParams& p2,
                                 const LossKind& loss);

}  // namespace deepmom::mom
