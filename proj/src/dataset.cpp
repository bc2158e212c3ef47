#include "deepmom/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "deepmom/errors.hpp"

namespace deepmom::data {

const char* to_string(Task task) {
  return task == Task::Regression ? "regression" : "classification";
}

std::size_t Dataset::informative_count() const noexcept {
  return static_cast<std::size_t>(std::count(informative.begin(), informative.end(), 1));
}

std::size_t Dataset::label(std::size_t i) const {
  if (task != Task::Classification) throw DomainError("labels are only defined for classification");
  return argmax(outputs.row(i));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.task = task;
  out.inputs = Matrix(rows.size(), input_dim());
  out.outputs = Matrix(rows.size(), output_dim());
  out.informative.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    if (r >= size()) throw ShapeError("row index out of range");
    std::ranges::copy(inputs.row(r), out.inputs.row(k).begin());
    std::ranges::copy(outputs.row(r), out.outputs.row(k).begin());
    out.informative[k] = informative[r];
  }
  return out;
}

void Dataset::validate() const {
  if (outputs.rows() != inputs.rows() || informative.size() != inputs.rows()) {
    throw ShapeError("inputs, outputs and mask disagree on the sample count");
  }
  if (task == Task::Regression && outputs.cols() != 1) {
    throw DomainError("regression data must have a single output column");
  }
  if (task == Task::Classification) {
    if (outputs.cols() < 2) throw DomainError("classification data needs at least two classes");
    for (std::size_t i = 0; i < size(); ++i) {
      std::size_t ones = 0;
      for (double v : outputs.row(i)) {
        if (v == 1.0) ++ones;
        else if (v != 0.0) throw DomainError("classification targets must be one-hot");
      }
      if (ones != 1) throw DomainError("classification targets must be one-hot");
    }
  }
}

Split split_half(const Dataset& ds) {
  const std::size_t half = ds.size() / 2;
  std::vector<std::size_t> first(half);
  std::vector<std::size_t> second(ds.size() - half);
  std::iota(first.begin(), first.end(), std::size_t{0});
  std::iota(second.begin(), second.end(), half);
  return {ds.subset(first), ds.subset(second)};
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best;
}

}  // namespace deepmom::data
