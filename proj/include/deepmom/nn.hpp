#pragma once

// Dense feed-forward ReLU networks: parameter storage, forward evaluation,
// reverse-mode gradients and initialization.
//
// A network with l hidden layers is the composition of l + 1 affine maps
// with a componentwise ReLU after every affine map except the last:
//
//   g(x) = M^l f(M^{l-1} ... f(M^0 x + t^0) ... + t^{l-1}) + t^l
//
// Weight matrices are stored row-major with shape (fan_out x fan_in).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deepmom/errors.hpp"

namespace deepmom::nn {

/// Layer widths of a ReLU MLP. An empty hidden list is a single affine map.
struct Architecture {
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::vector<std::size_t> hidden_widths;

  /// p inputs, c outputs, `depth` hidden layers of identical `width`.
  static Architecture uniform(std::size_t input_dim, std::size_t output_dim, std::size_t depth,
                              std::size_t width);

  /// Number of affine maps, l + 1.
  std::size_t affine_count() const noexcept { return hidden_widths.size() + 1; }
  /// Width of the input side of affine map j (p^j).
  std::size_t fan_in(std::size_t j) const;
  /// Width of the output side of affine map j (p^{j+1}).
  std::size_t fan_out(std::size_t j) const;

  /// Throws ConfigError when any width is zero.
  void validate() const;

  bool operator==(const Architecture&) const = default;
};

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct DenseLayer {
  Matrix weights;             // fan_out x fan_in
  std::vector<double> bias;   // fan_out

  bool operator==(const DenseLayer&) const = default;
};

/// Storage shared by network parameters and their gradients. The tag keeps
/// the two apart at the type level while sharing the layout.
template <class Tag>
class LayerStack {
 public:
  LayerStack() = default;

  /// Zero-filled stack shaped for `arch`.
  explicit LayerStack(const Architecture& arch) : arch_(arch) {
    arch_.validate();
    layers_.reserve(arch_.affine_count());
    for (std::size_t j = 0; j < arch_.affine_count(); ++j) {
      layers_.push_back({Matrix(arch_.fan_out(j), arch_.fan_in(j)),
                         std::vector<double>(arch_.fan_out(j), 0.0)});
    }
  }

  const Architecture& architecture() const noexcept { return arch_; }
  std::size_t depth() const noexcept { return layers_.size(); }

  DenseLayer& layer(std::size_t j) noexcept { return layers_[j]; }
  const DenseLayer& layer(std::size_t j) const noexcept { return layers_[j]; }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }

  /// Visits every scalar in canonical order: for each layer j, the weights
  /// of M^j row by row, then the entries of theta^j.
  template <class F>
  void for_each(F&& f) {
    for (auto& l : layers_) {
      for (double& v : l.weights.values()) f(v);
      for (double& v : l.bias) f(v);
    }
  }
  template <class F>
  void for_each(F&& f) const {
    for (const auto& l : layers_) {
      for (double v : l.weights.values()) f(v);
      for (double v : l.bias) f(v);
    }
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&](double v) { ok = ok && std::isfinite(v); });
    return ok;
  }
  bool same_shape(const Architecture& arch) const noexcept { return arch_ == arch; }

  bool operator==(const LayerStack&) const = default;

 private:
  Architecture arch_;
  std::vector<DenseLayer> layers_;
};

struct ParamsTag {};
struct GradientTag {};

/// The pair (M, theta) of a ReLU MLP.
using NetworkParams = LayerStack<ParamsTag>;
/// Partial derivatives of a scalar objective, shaped like NetworkParams.
using GradientSet = LayerStack<GradientTag>;

/// Initialization schemes. `Uniform` draws i.i.d. U(low, high) for every
/// weight and bias. `ScaledUniform` draws the entries of M^j and theta^j from
/// U(-sqrt(6 / p^j), sqrt(6 / p^j)).
struct InitScheme {
  enum class Kind { Uniform, ScaledUniform };
  Kind kind = Kind::ScaledUniform;
  double low = -1.0;
  double high = 1.0;

  static InitScheme uniform(double low, double high) { return {Kind::Uniform, low, high}; }
  static InitScheme scaled_uniform() { return {Kind::ScaledUniform, 0.0, 0.0}; }
};

NetworkParams init_params(const Architecture& arch, const InitScheme& scheme, std::uint64_t seed);

/// g(x) for a single input of length p.
std::vector<double> forward(const NetworkParams& params, std::span<const double> x);

/// Evaluates the selected rows of `inputs`; row k of the result is g(inputs[rows[k]]).
Matrix forward_rows(const NetworkParams& params, const Matrix& inputs,
                    std::span<const std::size_t> rows);

/// Evaluates every row of `inputs`.
Matrix forward_all(const NetworkParams& params, const Matrix& inputs);

/// Intermediate values of one forward pass, kept for backpropagation.
/// activations[0] is the input; activations[j] (1 <= j <= l) the post-ReLU
/// output of hidden layer j; `output` the final affine map.
struct ForwardTape {
  std::vector<std::vector<double>> activations;
  std::vector<double> output;
};

ForwardTape forward_tape(const NetworkParams& params, std::span<const double> x);

/// Adds the gradient of a scalar objective with respect to all parameters
/// to `grad`, given the objective's derivative with respect to the output.
/// A hidden unit with pre-activation exactly 0 passes no gradient.
void accumulate_backward(const NetworkParams& params, const ForwardTape& tape,
                         std::span<const double> dloss_doutput, GradientSet& grad);

/// Forward tape for a batch of rows: one matrix per layer, row k belongs to
/// rows[k]. Values are bitwise equal to forward_tape of each row.
struct BatchTape {
  std::vector<Matrix> activations;
  Matrix output;
};

BatchTape forward_tape_rows(const NetworkParams& params, const Matrix& inputs,
                            std::span<const std::size_t> rows);

/// accumulate_backward for every row of the tape, in row order, with
/// dloss_doutput holding one output-gradient row per tape row.
void accumulate_backward_batch(const NetworkParams& params, const BatchTape& tape,
                               const Matrix& dloss_doutput, GradientSet& grad);

/// Gradient of an objective for one sample, given dL/d(output).
GradientSet backward(const NetworkParams& params, std::span<const double> x,
                     std::span<const double> dloss_doutput);

/// Euclidean norm of the stacked parameter difference a - b.
double param_distance(const NetworkParams& a, const NetworkParams& b);

/// Euclidean norm of a gradient.
double norm(const GradientSet& g);

/// params += alpha * grad
void add_scaled(NetworkParams& params, double alpha, const GradientSet& grad);

/// grad *= alpha
void scale(GradientSet& grad, double alpha);

}  // namespace deepmom::nn
