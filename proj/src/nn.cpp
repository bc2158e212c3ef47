#include "deepmom/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "deepmom/rng.hpp"

namespace deepmom::nn {

Architecture Architecture::uniform(std::size_t input_dim, std::size_t output_dim, std::size_t depth,
                                   std::size_t width) {
  return {input_dim, output_dim, std::vector<std::size_t>(depth, width)};
}

std::size_t Architecture::fan_in(std::size_t j) const {
  if (j >= affine_count()) throw ShapeError("layer index out of range");
  return j == 0 ? input_dim : hidden_widths[j - 1];
}

std::size_t Architecture::fan_out(std::size_t j) const {
  if (j >= affine_count()) throw ShapeError("layer index out of range");
  return j == hidden_widths.size() ? output_dim : hidden_widths[j];
}

void Architecture::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ConfigError("input and output widths must be positive");
  for (std::size_t w : hidden_widths) {
    if (w == 0) throw ConfigError("hidden widths must be positive");
  }
}

NetworkParams init_params(const Architecture& arch, const InitScheme& scheme, std::uint64_t seed) {
  if (scheme.kind == InitScheme::Kind::Uniform && !(scheme.low <= scheme.high)) {
    throw ConfigError("uniform init requires low <= high");
  }
  NetworkParams params(arch);
  Rng rng(seed);
  for (std::size_t j = 0; j < params.depth(); ++j) {
    double lo = scheme.low;
    double hi = scheme.high;
    if (scheme.kind == InitScheme::Kind::ScaledUniform) {
      hi = std::sqrt(6.0 / static_cast<double>(arch.fan_in(j)));
      lo = -hi;
    }
    DenseLayer& layer = params.layer(j);
    if (lo == hi) {
      std::ranges::fill(layer.weights.values(), lo);
      std::ranges::fill(layer.bias, lo);
      continue;
    }
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : layer.weights.values()) v = dist(rng);
    for (double& v : layer.bias) v = dist(rng);
  }
  return params;
}

namespace {

void check_input(const NetworkParams& params, std::size_t len) {
  if (params.depth() == 0) throw ShapeError("network has no layers");
  if (len != params.architecture().input_dim) {
    throw ShapeError("input length " + std::to_string(len) + " does not match network input width " +
                     std::to_string(params.architecture().input_dim));
  }
}

// out = bias + W a, accumulated in column order so that the batched kernel
// below produces bitwise-identical results.
void affine(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  const std::size_t rows = layer.weights.rows();
  const std::size_t cols = layer.weights.cols();
  out.assign(layer.bias.begin(), layer.bias.end());
  for (std::size_t v = 0; v < rows; ++v) {
    const auto w_row = layer.weights.row(v);
    double acc = out[v];
    for (std::size_t w = 0; w < cols; ++w) acc += w_row[w] * in[w];
    out[v] = acc;
  }
}

void relu(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

// Z = A W^T + 1 b^T for a block of rows. Each Z(i, v) sees the same sequence
// of additions as affine().
Matrix affine_batch(const DenseLayer& layer, const Matrix& a) {
  const Matrix wt = transpose(layer.weights);
  const std::size_t out_dim = layer.weights.rows();
  const std::size_t in_dim = layer.weights.cols();
  Matrix z(a.rows(), out_dim);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* zi = z.row(i).data();
    const double* ai = a.row(i).data();
    std::copy(layer.bias.begin(), layer.bias.end(), zi);
    for (std::size_t w = 0; w < in_dim; ++w) {
      const double aw = ai[w];
      const double* wt_row = wt.row(w).data();
      for (std::size_t v = 0; v < out_dim; ++v) zi[v] += aw * wt_row[v];
    }
  }
  return z;
}

Matrix run_layers(const NetworkParams& params, Matrix a) {
  for (std::size_t j = 0; j < params.depth(); ++j) {
    a = affine_batch(params.layer(j), a);
    if (j + 1 < params.depth()) {
      for (double& x : a.values()) x = x > 0.0 ? x : 0.0;
    }
  }
  return a;
}

template <class Tag>
void check_same_shape(const NetworkParams& a, const LayerStack<Tag>& b) {
  if (!(a.architecture() == b.architecture())) throw ShapeError("parameter shapes differ");
}

}  // namespace

std::vector<double> forward(const NetworkParams& params, std::span<const double> x) {
  return forward_tape(params, x).output;
}

Matrix forward_rows(const NetworkParams& params, const Matrix& inputs,
                    std::span<const std::size_t> rows) {
  check_input(params, inputs.cols());
  Matrix a(rows.size(), inputs.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= inputs.rows()) throw ShapeError("row index out of range");
    std::ranges::copy(inputs.row(rows[k]), a.row(k).begin());
  }
  return run_layers(params, std::move(a));
}

Matrix forward_all(const NetworkParams& params, const Matrix& inputs) {
  check_input(params, inputs.cols());
  return run_layers(params, inputs);
}

ForwardTape forward_tape(const NetworkParams& params, std::span<const double> x) {
  check_input(params, x.size());
  ForwardTape tape;
  tape.activations.reserve(params.depth());
  tape.activations.emplace_back(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t j = 0; j < params.depth(); ++j) {
    affine(params.layer(j), tape.activations.back(), z);
    if (j + 1 < params.depth()) {
      relu(z);
      tape.activations.push_back(z);
    }
  }
  tape.output = std::move(z);
  return tape;
}

void accumulate_backward(const NetworkParams& params, const ForwardTape& tape,
                         std::span<const double> dloss_doutput, GradientSet& grad) {
  check_same_shape(params, grad);
  if (dloss_doutput.size() != params.architecture().output_dim) {
    throw ShapeError("output gradient length does not match network output width");
  }
  if (tape.activations.size() != params.depth()) throw ShapeError("tape does not match network depth");

  std::vector<double> delta(dloss_doutput.begin(), dloss_doutput.end());
  std::vector<double> upstream;
  for (std::size_t jj = params.depth(); jj-- > 0;) {
    const DenseLayer& layer = params.layer(jj);
    DenseLayer& g = grad.layer(jj);
    const std::vector<double>& a = tape.activations[jj];
    const std::size_t rows = layer.weights.rows();
    const std::size_t cols = layer.weights.cols();
    for (std::size_t v = 0; v < rows; ++v) {
      const double dv = delta[v];
      g.bias[v] += dv;
      if (dv == 0.0) continue;
      auto g_row = g.weights.row(v);
      for (std::size_t w = 0; w < cols; ++w) g_row[w] += dv * a[w];
    }
    if (jj == 0) break;
    // Back through M^jj, then through the ReLU that produced `a`. A zero
    // activation means the pre-activation was <= 0, where the derivative is 0.
    upstream.assign(cols, 0.0);
    for (std::size_t v = 0; v < rows; ++v) {
      const double dv = delta[v];
      if (dv == 0.0) continue;
      const auto w_row = layer.weights.row(v);
      for (std::size_t w = 0; w < cols; ++w) upstream[w] += w_row[w] * dv;
    }
    for (std::size_t w = 0; w < cols; ++w) {
      if (!(a[w] > 0.0)) upstream[w] = 0.0;
    }
    delta.swap(upstream);
  }
}

BatchTape forward_tape_rows(const NetworkParams& params, const Matrix& inputs,
                            std::span<const std::size_t> rows) {
  check_input(params, inputs.cols());
  Matrix a(rows.size(), inputs.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= inputs.rows()) throw ShapeError("row index out of range");
    std::ranges::copy(inputs.row(rows[k]), a.row(k).begin());
  }
  BatchTape tape;
  tape.activations.reserve(params.depth());
  tape.activations.push_back(std::move(a));
  for (std::size_t j = 0; j < params.depth(); ++j) {
    Matrix z = affine_batch(params.layer(j), tape.activations.back());
    if (j + 1 < params.depth()) {
      for (double& x : z.values()) x = x > 0.0 ? x : 0.0;
      tape.activations.push_back(std::move(z));
    } else {
      tape.output = std::move(z);
    }
  }
  return tape;
}

// Same per-sample operation sequence as accumulate_backward, so the
// accumulated sums are bitwise identical to a loop over single samples.
void accumulate_backward_batch(const NetworkParams& params, const BatchTape& tape,
                               const Matrix& dloss_doutput, GradientSet& grad) {
  check_same_shape(params, grad);
  if (tape.activations.size() != params.depth()) throw ShapeError("tape does not match network depth");
  const std::size_t n = tape.output.rows();
  if (dloss_doutput.rows() != n || dloss_doutput.cols() != params.architecture().output_dim) {
    throw ShapeError("output gradient does not match the tape");
  }

  Matrix delta = dloss_doutput;
  for (std::size_t jj = params.depth(); jj-- > 0;) {
    const DenseLayer& layer = params.layer(jj);
    DenseLayer& g = grad.layer(jj);
    const Matrix& a = tape.activations[jj];
    const std::size_t rows = layer.weights.rows();
    const std::size_t cols = layer.weights.cols();
    for (std::size_t i = 0; i < n; ++i) {
      const double* di = delta.row(i).data();
      const double* ai = a.row(i).data();
      for (std::size_t v = 0; v < rows; ++v) {
        const double dv = di[v];
        g.bias[v] += dv;
        if (dv == 0.0) continue;
        double* g_row = g.weights.row(v).data();
        for (std::size_t w = 0; w < cols; ++w) g_row[w] += dv * ai[w];
      }
    }
    if (jj == 0) break;
    Matrix upstream(n, cols);
    for (std::size_t i = 0; i < n; ++i) {
      const double* di = delta.row(i).data();
      const double* ai = a.row(i).data();
      double* ui = upstream.row(i).data();
      for (std::size_t v = 0; v < rows; ++v) {
        const double dv = di[v];
        if (dv == 0.0) continue;
        const double* w_row = layer.weights.row(v).data();
        for (std::size_t w = 0; w < cols; ++w) ui[w] += w_row[w] * dv;
      }
      for (std::size_t w = 0; w < cols; ++w) {
        if (!(ai[w] > 0.0)) ui[w] = 0.0;
      }
    }
    delta = std::move(upstream);
  }
}

GradientSet backward(const NetworkParams& params, std::span<const double> x,
                     std::span<const double> dloss_doutput) {
  GradientSet grad(params.architecture());
  accumulate_backward(params, forward_tape(params, x), dloss_doutput, grad);
  return grad;
}

double param_distance(const NetworkParams& a, const NetworkParams& b) {
  check_same_shape(a, b);
  double sum = 0.0;
  for (std::size_t j = 0; j < a.depth(); ++j) {
    const auto wa = a.layer(j).weights.values();
    const auto wb = b.layer(j).weights.values();
    for (std::size_t k = 0; k < wa.size(); ++k) sum += (wa[k] - wb[k]) * (wa[k] - wb[k]);
    const auto& ba = a.layer(j).bias;
    const auto& bb = b.layer(j).bias;
    for (std::size_t k = 0; k < ba.size(); ++k) sum += (ba[k] - bb[k]) * (ba[k] - bb[k]);
  }
  return std::sqrt(sum);
}

double norm(const GradientSet& g) {
  double sum = 0.0;
  g.for_each([&](double v) { sum += v * v; });
  return std::sqrt(sum);
}

void add_scaled(NetworkParams& params, double alpha, const GradientSet& grad) {
  check_same_shape(params, grad);
  for (std::size_t j = 0; j < params.depth(); ++j) {
    auto w = params.layer(j).weights.values();
    const auto gw = grad.layer(j).weights.values();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += alpha * gw[k];
    auto& b = params.layer(j).bias;
    const auto& gb = grad.layer(j).bias;
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += alpha * gb[k];
  }
}

void scale(GradientSet& grad, double alpha) {
  grad.for_each([alpha](double& v) { v *= alpha; });
}

}  // namespace deepmom::nn
