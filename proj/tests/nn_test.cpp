#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "deepmom/losses.hpp"
#include "deepmom/nn.hpp"
#include "oracles.hpp"

namespace deepmom::nn {
namespace {

using testing::central_differences;
using testing::flatten;
using testing::naive_forward;
using testing::random_params;
using testing::relative_error;

NetworkParams single_affine(double w, double b) {
  NetworkParams p(Architecture{1, 1, {}});
  p.layer(0).weights(0, 0) = w;
  p.layer(0).bias[0] = b;
  return p;
}

TEST(Architecture, FanInFanOut) {
  const auto arch = Architecture::uniform(3, 2, 2, 4);
  EXPECT_EQ(arch.affine_count(), 3u);
  EXPECT_EQ(arch.fan_in(0), 3u);
  EXPECT_EQ(arch.fan_out(0), 4u);
  EXPECT_EQ(arch.fan_in(2), 4u);
  EXPECT_EQ(arch.fan_out(2), 2u);
  EXPECT_THROW(arch.fan_in(3), ShapeError);
  EXPECT_THROW((Architecture{0, 1, {}}.validate()), ConfigError);
  EXPECT_THROW((Architecture{2, 1, {3, 0}}.validate()), ConfigError);
}

TEST(Forward, SingleAffineLayer) {
  const double x[] = {1.0};
  EXPECT_EQ(forward(single_affine(2.0, 3.0), x), std::vector<double>{5.0});
}

TEST(Forward, ReluKillsNegativeBranch) {
  NetworkParams p(Architecture{1, 1, {2}});
  p.layer(0).weights(0, 0) = 1.0;
  p.layer(0).weights(1, 0) = -1.0;
  p.layer(1).weights(0, 0) = 1.0;
  p.layer(1).weights(0, 1) = 1.0;
  const double x[] = {-2.0};
  const auto tape = forward_tape(p, x);
  EXPECT_EQ(tape.activations[1], (std::vector<double>{0.0, 2.0}));
  EXPECT_EQ(tape.output, std::vector<double>{2.0});
}

TEST(Forward, MatchesStraightLineEvaluator) {
  const auto arch = Architecture::uniform(3, 1, 2, 4);
  std::mt19937_64 rng(7);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = random_params(arch, 100 + s);
    const auto x = testing::random_vector(3, rng, 2.0);
    const auto got = forward(p, x);
    const auto want = naive_forward(p, x);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
  }
}

TEST(Forward, BatchedRowsAgreeBitwiseWithSingleSample) {
  const auto arch = Architecture::uniform(5, 3, 3, 8);
  const auto p = random_params(arch, 3);
  const auto ds = testing::random_dataset(12, 5, 3, true, 5);
  const std::vector<std::size_t> rows = {4, 0, 11, 4};
  const Matrix out = forward_rows(p, ds.inputs, rows);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto single = forward(p, ds.x(rows[k]));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out(k, j), single[j]);
  }
}

TEST(Forward, IsPure) {
  const auto p = random_params(Architecture::uniform(4, 2, 2, 6), 9);
  const std::vector<double> x = {0.3, -0.2, 1.5, 0.0};
  EXPECT_EQ(forward(p, x), forward(p, x));
}

TEST(Forward, RejectsWrongInputLength) {
  const auto p = random_params(Architecture::uniform(3, 1, 1, 2), 1);
  const std::vector<double> x = {1.0, 2.0};
  EXPECT_THROW(forward(p, x), ShapeError);
}

TEST(Forward, PositiveHomogeneityWithZeroBiases) {
  auto p = random_params(Architecture::uniform(4, 2, 3, 5), 11);
  for (std::size_t j = 0; j < p.depth(); ++j) std::ranges::fill(p.layer(j).bias, 0.0);
  const std::vector<double> x = {0.4, -1.2, 0.7, 0.1};
  const double lambda = 3.5;
  std::vector<double> scaled = x;
  for (double& v : scaled) v *= lambda;
  const auto t1 = forward_tape(p, x);
  const auto t2 = forward_tape(p, scaled);
  for (std::size_t j = 1; j < t1.activations.size(); ++j) {
    for (std::size_t v = 0; v < t1.activations[j].size(); ++v) {
      EXPECT_NEAR(t2.activations[j][v], lambda * t1.activations[j][v], 1e-12);
    }
  }
  for (std::size_t v = 0; v < 2; ++v) EXPECT_NEAR(t2.output[v], lambda * t1.output[v], 1e-12);
}

TEST(Backward, AffineGradient) {
  const double x[] = {1.0};
  const double d[] = {1.0};
  const auto g = backward(single_affine(2.0, 3.0), x, d);
  EXPECT_EQ(g.layer(0).weights(0, 0), 1.0);
  EXPECT_EQ(g.layer(0).bias[0], 1.0);
}

TEST(Backward, ZeroPreActivationPassesNoGradient) {
  // Hidden unit 0 has pre-activation exactly 0: 1 * 1 + (-1).
  NetworkParams p(Architecture{1, 1, {2}});
  p.layer(0).weights(0, 0) = 1.0;
  p.layer(0).bias[0] = -1.0;
  p.layer(0).weights(1, 0) = 1.0;
  p.layer(0).bias[1] = 1.0;
  p.layer(1).weights(0, 0) = 4.0;
  p.layer(1).weights(0, 1) = 5.0;
  const double x[] = {1.0};
  const double d[] = {1.0};
  const auto g = backward(p, x, d);
  EXPECT_EQ(g.layer(0).weights(0, 0), 0.0);
  EXPECT_EQ(g.layer(0).bias[0], 0.0);
  EXPECT_EQ(g.layer(0).weights(1, 0), 5.0);
  EXPECT_EQ(g.layer(0).bias[1], 5.0);
}

TEST(Backward, RejectsWrongOutputGradientLength) {
  const auto p = random_params(Architecture::uniform(2, 3, 1, 2), 1);
  const std::vector<double> x = {1.0, 2.0};
  const std::vector<double> d = {1.0};
  EXPECT_THROW(backward(p, x, d), ShapeError);
}

TEST(Backward, BatchMatchesPerSampleLoopBitwise) {
  const auto arch = Architecture::uniform(4, 3, 2, 7);
  const auto p = random_params(arch, 31);
  const auto ds = testing::random_dataset(20, 4, 3, true, 32);
  const std::vector<std::size_t> rows = {3, 17, 0, 3, 9, 12};
  std::mt19937_64 rng(33);
  Matrix dout(rows.size(), 3);
  for (double& v : dout.values()) v = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  dout(2, 1) = 0.0;

  GradientSet loop(arch);
  for (std::size_t k = 0; k < rows.size(); ++k) accumulate_backward(p, forward_tape(p, ds.x(rows[k])), dout.row(k), loop);
  const BatchTape tape = forward_tape_rows(p, ds.inputs, rows);
  GradientSet batch(arch);
  accumulate_backward_batch(p, tape, dout, batch);
  EXPECT_EQ(batch, loop);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_TRUE(std::ranges::equal(tape.output.row(k), forward(p, ds.x(rows[k]))));
  }
}

// Linear objective <w, g(x)> so that the finite-difference oracle only needs forward.
TEST(Backward, MatchesCentralDifferencesOfForward) {
  const auto arch = Architecture::uniform(3, 2, 2, 4);
  std::mt19937_64 rng(21);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = random_params(arch, 50 + s, 0.8);
    const auto x = testing::random_vector(3, rng, 1.5);
    const auto w = testing::random_vector(2, rng);
    auto objective = [&](const NetworkParams& q) {
      const auto out = naive_forward(q, x);
      return w[0] * out[0] + w[1] * out[1];
    };
    const auto numeric = central_differences(p, objective, 1e-6);
    const auto analytic = flatten(backward(p, x, w));
    EXPECT_LT(relative_error(analytic, numeric), 1e-5) << "seed " << s;
  }
}

TEST(Init, DeterministicGivenSeed) {
  const auto arch = Architecture::uniform(4, 1, 2, 6);
  EXPECT_EQ(init_params(arch, InitScheme::uniform(-1, 1), 42), init_params(arch, InitScheme::uniform(-1, 1), 42));
  EXPECT_NE(init_params(arch, InitScheme::uniform(-1, 1), 42), init_params(arch, InitScheme::uniform(-1, 1), 43));
  EXPECT_EQ(init_params(arch, InitScheme::scaled_uniform(), 5), init_params(arch, InitScheme::scaled_uniform(), 5));
}

TEST(Init, DegenerateBoundsGiveZeros) {
  const auto p = init_params(Architecture::uniform(3, 2, 1, 4), InitScheme::uniform(0.0, 0.0), 1);
  p.for_each([](double v) { EXPECT_EQ(v, 0.0); });
}

TEST(Init, RejectsInvertedBounds) {
  EXPECT_THROW(init_params(Architecture::uniform(3, 1, 1, 4), InitScheme::uniform(1.0, -1.0), 1), ConfigError);
}

TEST(Init, UniformMoments) {
  // 1000 x 99 weights + 1000 biases = 10^5 draws.
  const auto p = init_params(Architecture{99, 1000, {}}, InitScheme::uniform(-1.0, 1.0), 8);
  double sum = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  p.for_each([&](double v) {
    sum += v;
    sq += v * v;
    ++n;
  });
  ASSERT_EQ(n, 100000u);
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0 / 3.0, 0.02);
}

TEST(Init, ScaledUniformBounds) {
  const auto arch = Architecture::uniform(6, 1, 1, 24);
  const auto p = init_params(arch, InitScheme::scaled_uniform(), 3);
  for (std::size_t j = 0; j < p.depth(); ++j) {
    const double bound = std::sqrt(6.0 / static_cast<double>(arch.fan_in(j)));
    for (double v : p.layer(j).weights.values()) EXPECT_LE(std::abs(v), bound);
  }
}

TEST(ParamDistance, Identity) {
  const auto p = random_params(Architecture::uniform(3, 1, 2, 4), 1);
  EXPECT_EQ(param_distance(p, p), 0.0);
}

TEST(ParamDistance, SingleCoordinate) {
  const auto a = random_params(Architecture::uniform(3, 1, 2, 4), 1);
  auto b = a;
  b.layer(1).weights(2, 3) -= 3.0;
  EXPECT_NEAR(param_distance(a, b), 3.0, 1e-15);
  auto c = a;
  c.layer(2).bias[0] += 3.0;
  EXPECT_NEAR(param_distance(a, c), 3.0, 1e-15);
}

TEST(ParamDistance, MatchesFlatLoop) {
  const auto arch = Architecture::uniform(5, 2, 3, 7);
  const auto a = random_params(arch, 1);
  const auto b = random_params(arch, 2);
  std::vector<double> fa;
  std::vector<double> fb;
  a.for_each([&](double v) { fa.push_back(v); });
  b.for_each([&](double v) { fb.push_back(v); });
  double ss = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) ss += (fa[k] - fb[k]) * (fa[k] - fb[k]);
  EXPECT_NEAR(param_distance(a, b), std::sqrt(ss), 1e-12);
}

TEST(ParamDistance, ShapeMismatch) {
  const auto a = random_params(Architecture::uniform(3, 1, 2, 4), 1);
  const auto b = random_params(Architecture::uniform(3, 1, 2, 5), 1);
  EXPECT_THROW(param_distance(a, b), ShapeError);
}

}  // namespace
}  // namespace deepmom::nn
