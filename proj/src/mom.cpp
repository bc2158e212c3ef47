#include "deepmom/mom.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "deepmom/errors.hpp"

namespace deepmom::mom {

std::size_t BlockPartition::total() const noexcept {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

BlockPartition BlockPartition::remap(std::span<const std::size_t> rows) const {
  BlockPartition out;
  out.blocks.reserve(blocks.size());
  for (const auto& block : blocks) {
    auto& mapped = out.blocks.emplace_back();
    mapped.reserve(block.size());
    for (std::size_t i : block) {
      if (i >= rows.size()) throw ShapeError("partition index outside the row map");
      mapped.push_back(rows[i]);
    }
  }
  return out;
}

BlockPartition equipartition(std::span<const std::size_t> order, std::size_t b) {
  const std::size_t m = order.size();
  if (b == 0 || b > m) {
    throw DomainError("block count " + std::to_string(b) + " must lie in [1, " + std::to_string(m) + "]");
  }
  const std::size_t size = m / b;
  BlockPartition p;
  p.blocks.reserve(b);
  auto it = order.begin();
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t len = (k + 1 < b) ? size : m - size * (b - 1);
    p.blocks.emplace_back(it, it + static_cast<std::ptrdiff_t>(len));
    it += static_cast<std::ptrdiff_t>(len);
  }
  return p;
}

BlockPartition equipartition(std::size_t m, std::size_t b, Rng& rng) {
  if (b == 0 || b > m) {
    throw DomainError("block count " + std::to_string(b) + " must lie in [1, " + std::to_string(m) + "]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  return equipartition(order, b);
}

BlockPartition equipartition(std::size_t m, std::size_t b, std::uint64_t seed) {
  Rng rng(seed);
  return equipartition(m, b, rng);
}

MedianBlockReport median_block(std::span<const double> block_means) {
  if (block_means.empty()) throw DomainError("median of an empty set of blocks");
  std::vector<double> sorted(block_means.begin(), block_means.end());
  const std::size_t rank = (sorted.size() + 1) / 2;  // ceil(b/2)
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  const double quantile = sorted[rank - 1];

  MedianBlockReport report;
  report.block_means.assign(block_means.begin(), block_means.end());
  report.median_value = quantile;
  for (std::size_t k = 0; k < block_means.size(); ++k) {
    if (block_means[k] == quantile) {
      report.median_index = k;
      break;
    }
  }
  return report;
}

std::vector<double> sample_losses(const NetworkParams& params, const Dataset& data,
                                  std::span<const std::size_t> rows, const LossKind& loss) {
  const nn::Matrix out = nn::forward_rows(params, data.inputs, rows);
  std::vector<double> losses(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    losses[k] = loss::loss_value(loss, data.y(rows[k]), out.row(k));
  }
  return losses;
}

BlockLosses block_losses(const BlockPartition& partition, const Dataset& data,
                         const NetworkParams& params, const LossKind& loss) {
  std::vector<std::size_t> rows;
  rows.reserve(partition.total());
  for (const auto& b : partition.blocks) {
    if (b.empty()) throw DomainError("empty block");
    rows.insert(rows.end(), b.begin(), b.end());
  }
  const std::vector<double> flat = sample_losses(params, data, rows, loss);
  BlockLosses out;
  out.reserve(partition.count());
  auto it = flat.begin();
  for (const auto& b : partition.blocks) {
    out.emplace_back(it, it + static_cast<std::ptrdiff_t>(b.size()));
    it += static_cast<std::ptrdiff_t>(b.size());
  }
  return out;
}

namespace {

double mean_difference(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] - b[i];
  return sum / static_cast<double>(a.size());
}

}  // namespace

std::vector<double> increment_means(const BlockLosses& loss1, const BlockLosses& loss2) {
  if (loss1.size() != loss2.size()) throw ShapeError("players disagree on the block count");
  std::vector<double> means(loss1.size());
  for (std::size_t k = 0; k < loss1.size(); ++k) {
    if (loss1[k].size() != loss2[k].size()) throw ShapeError("players disagree on a block size");
    if (loss1[k].empty()) throw DomainError("empty block");
    means[k] = mean_difference(loss1[k], loss2[k]);
  }
  return means;
}

double block_increment_mean(std::span<const std::size_t> block, const Dataset& data,
                            const NetworkParams& p1, const NetworkParams& p2, const LossKind& loss) {
  if (block.empty()) throw DomainError("empty block");
  return mean_difference(sample_losses(p1, data, block, loss), sample_losses(p2, data, block, loss));
}

MedianBlockReport median_block_report(const BlockPartition& partition, const Dataset& data,
                                      const NetworkParams& p1, const NetworkParams& p2,
                                      const LossKind& loss) {
  return median_block(increment_means(block_losses(partition, data, p1, loss),
                                      block_losses(partition, data, p2, loss)));
}

double mom_objective(const BlockPartition& partition, const Dataset& data, const NetworkParams& p1,
                     const NetworkParams& p2, const LossKind& loss) {
  return median_block_report(partition, data, p1, p2, loss).median_value;
}

GradientSet mean_loss_gradient(const NetworkParams& params, const Dataset& data,
                               std::span<const std::size_t> rows, const LossKind& loss,
                               double* mean_loss) {
  if (rows.empty()) throw DomainError("gradient over an empty block");
  GradientSet grad(params.architecture());
  const nn::BatchTape tape = nn::forward_tape_rows(params, data.inputs, rows);
  nn::Matrix dout(rows.size(), params.architecture().output_dim);
  double total = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (mean_loss != nullptr) total += loss::loss_value(loss, data.y(rows[k]), tape.output.row(k));
    loss::loss_grad(loss, data.y(rows[k]), tape.output.row(k), dout.row(k));
  }
  nn::accumulate_backward_batch(params, tape, dout, grad);
  nn::scale(grad, 1.0 / static_cast<double>(rows.size()));
  if (mean_loss != nullptr) *mean_loss = total / static_cast<double>(rows.size());
  return grad;
}

GradientSet mom_gradient_player1(const BlockPartition& partition, const Dataset& data,
                                 const NetworkParams& p1, const NetworkParams& p2,
                                 const LossKind& loss) {
  const auto report = median_block_report(partition, data, p1, p2, loss);
  return mean_loss_gradient(p1, data, partition.blocks[report.median_index], loss);
}

GradientSet mom_gradient_player2(const BlockPartition& partition, const Dataset& data,
                                 const NetworkParams& p1, const NetworkParams& p2,
                                 const LossKind& loss) {
  const auto report = median_block_report(partition, data, p1, p2, loss);
  GradientSet grad = mean_loss_gradient(p2, data, partition.blocks[report.median_index], loss);
  nn::scale(grad, -1.0);
  return grad;
}

}  // namespace deepmom::mom
