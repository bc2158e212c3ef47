#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deepmom/nn.hpp"

namespace deepmom::data {

using nn::Matrix;

enum class Task { Regression, Classification };

const char* to_string(Task task);

/// Paired inputs and outputs. Regression targets have one column;
/// classification targets are one-hot rows. `informative[i]` is true when
/// sample i has not been corrupted.
struct Dataset {
  Matrix inputs;
  Matrix outputs;
  std::vector<std::uint8_t> informative;
  Task task = Task::Regression;

  std::size_t size() const noexcept { return inputs.rows(); }
  std::size_t input_dim() const noexcept { return inputs.cols(); }
  std::size_t output_dim() const noexcept { return outputs.cols(); }

  std::span<const double> x(std::size_t i) const noexcept { return inputs.row(i); }
  std::span<const double> y(std::size_t i) const noexcept { return outputs.row(i); }

  std::size_t informative_count() const noexcept;

  /// Class index of row i (classification only).
  std::size_t label(std::size_t i) const;

  /// Rows in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Throws ShapeError / DomainError when the invariants are violated.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

/// First half (training) and second half (test) of the rows, in order.
struct Split {
  Dataset train;
  Dataset test;
};
Split split_half(const Dataset& ds);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

}  // namespace deepmom::data
