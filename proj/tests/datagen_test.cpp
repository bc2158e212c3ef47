#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "deepmom/datagen.hpp"

namespace deepmom::data {
namespace {

double sample_sd(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> residuals(const Dataset& ds, const GroundTruth& truth) {
  const auto clean = clean_outputs(truth, ds);
  std::vector<double> r(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) r[i] = ds.y(i)[0] - clean[i];
  return r;
}

std::vector<std::size_t> corrupted_rows(const Dataset& ds) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.informative[i]) rows.push_back(i);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("deepmom_" + name);
  std::ofstream(path) << body;
  return path;
}

TEST(GenRegression, ColumnsHaveUnitSumOfSquares) {
  const auto gen = gen_regression(200, 7, 2, 5, 10.0, 1);
  for (std::size_t j = 0; j < 7; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < 200; ++i) ss += gen.data.inputs(i, j) * gen.data.inputs(i, j);
    EXPECT_NEAR(ss, 1.0, 1e-12);
  }
}

TEST(GenRegression, ShapesAndMask) {
  const auto gen = gen_regression(40, 3, 2, 6, 10.0, 2);
  EXPECT_EQ(gen.data.size(), 40u);
  EXPECT_EQ(gen.data.input_dim(), 3u);
  EXPECT_EQ(gen.data.output_dim(), 1u);
  EXPECT_EQ(gen.data.informative_count(), 40u);
  EXPECT_EQ(gen.truth.params.architecture(), nn::Architecture::uniform(3, 1, 2, 6));
  gen.truth.params.for_each([](double v) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  });
}

TEST(GenRegression, NoiselessOutputsAreExact) {
  const auto gen = gen_regression(30, 4, 1, 5, kNoiseless, 3);
  EXPECT_EQ(gen.truth.noise_sd, 0.0);
  const auto clean = clean_outputs(gen.truth, gen.data);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(gen.data.y(i)[0], clean[i]);
}

TEST(GenRegression, SignalToNoiseRatio) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto gen = gen_regression(600, 5, 2, 8, 10.0, seed);
    const double ratio = sample_sd(clean_outputs(gen.truth, gen.data)) / sample_sd(residuals(gen.data, gen.truth));
    EXPECT_GE(ratio, 8.5);
    EXPECT_LE(ratio, 11.5);
  }
}

TEST(GenRegression, DeterministicAndSeedDependent) {
  EXPECT_EQ(gen_regression(20, 3, 1, 4, 10.0, 5).data, gen_regression(20, 3, 1, 4, 10.0, 5).data);
  EXPECT_NE(gen_regression(20, 3, 1, 4, 10.0, 5).data, gen_regression(20, 3, 1, 4, 10.0, 6).data);
}

TEST(GenRegression, RejectsOddOrEmptySamples) {
  EXPECT_THROW(gen_regression(21, 3, 1, 4, 10.0, 0), ConfigError);
  EXPECT_THROW(gen_regression(0, 3, 1, 4, 10.0, 0), ConfigError);
}

TEST(UniformOutliers, FullyInformativeIsIdentity) {
  const auto gen = gen_regression(40, 3, 1, 4, 10.0, 7);
  EXPECT_EQ(corrupt_outputs_uniform(gen.data, gen.truth, 1.0, 3), gen.data);
}

TEST(UniformOutliers, ResidualsInRangeAndCountsMatch) {
  const auto gen = gen_regression(200, 5, 2, 6, 10.0, 8);
  const auto clean = clean_outputs(gen.truth, gen.data);
  double a = 0.0;
  for (double v : clean) a = std::max(a, std::abs(v));
  const auto ds = corrupt_outputs_uniform(gen.data, gen.truth, 0.75, 9);
  const auto rows = corrupted_rows(ds);
  EXPECT_EQ(rows.size(), 50u);
  const auto r = residuals(ds, gen.truth);
  for (std::size_t i : rows) {
    EXPECT_GE(r[i], 3.0 * a * (1 - 1e-12));
    EXPECT_LE(r[i], 5.0 * a * (1 + 1e-12));
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.informative[i]) EXPECT_EQ(ds.y(i)[0], gen.data.y(i)[0]);
  }
  EXPECT_EQ(ds.inputs, gen.data.inputs);
}

TEST(ChooseOutliers, RoundedCountDistinctRows) {
  for (double frac : {0.5, 0.75, 0.8, 0.95, 1.0}) {
    for (std::size_t n : {7u, 10u, 101u}) {
      auto rows = choose_outliers(n, frac, 4);
      EXPECT_EQ(rows.size(), static_cast<std::size_t>(std::lround((1.0 - frac) * n)));
      std::ranges::sort(rows);
      EXPECT_EQ(std::ranges::adjacent_find(rows), rows.end());
      for (std::size_t i : rows) EXPECT_LT(i, n);
    }
  }
  EXPECT_THROW(choose_outliers(10, 0.0, 1), ConfigError);
  EXPECT_THROW(choose_outliers(10, 1.5, 1), ConfigError);
}

TEST(StudentT, CauchyResidualsAreHeavyTailed) {
  const auto gen = gen_regression(10000, 2, 1, 3, 10.0, 10);
  const auto ds = corrupt_outputs_student_t(gen.data, gen.truth, 1.0, 11);
  const auto r = residuals(ds, gen.truth);
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : r) {
    m2 += (v - mean) * (v - mean);
    m4 += std::pow(v - mean, 4);
  }
  m2 /= r.size();
  m4 /= r.size();
  EXPECT_GT(m4 / (m2 * m2), 20.0);
  EXPECT_EQ(ds.informative_count(), ds.size());
  EXPECT_EQ(ds.inputs, gen.data.inputs);
}

TEST(StudentT, LargeDegreesOfFreedomApproachStandardNormal) {
  const auto gen = gen_regression(10000, 2, 1, 3, 10.0, 12);
  const auto ds = corrupt_outputs_student_t(gen.data, gen.truth, 1e6, 13);
  const double sd = sample_sd(residuals(ds, gen.truth));
  EXPECT_NEAR(sd * sd, 1.0, 0.05);
  EXPECT_THROW(corrupt_outputs_student_t(gen.data, gen.truth, 0.0, 1), ConfigError);
}

TEST(InputCorruption, OutputsUntouchedAndUnitVariancePerturbation) {
  const auto gen = gen_regression(200, 60, 1, 3, 10.0, 14);
  const auto ds = corrupt_inputs(gen.data, 0.75, 15);
  EXPECT_EQ(ds.outputs, gen.data.outputs);
  const auto rows = corrupted_rows(ds);
  EXPECT_EQ(rows.size(), 50u);
  double ss = 0.0;
  for (std::size_t i : rows) {
    for (std::size_t j = 0; j < 60; ++j) {
      const double d = ds.inputs(i, j) - gen.data.inputs(i, j);
      ss += d * d;
    }
  }
  EXPECT_NEAR(ss / (50.0 * 60.0), 1.0, 0.1);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.informative[i]) EXPECT_TRUE(std::ranges::equal(ds.x(i), gen.data.x(i)));
  }
  EXPECT_EQ(corrupt_inputs(gen.data, 1.0, 15), gen.data);
}

TEST(Spiral, ClassCountsAndShape) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto sp = gen_spiral(seed);
    ASSERT_EQ(sp.data.size(), 1000u);
    EXPECT_EQ(sp.data.input_dim(), 2u);
    std::vector<std::size_t> counts(kSpiralClasses, 0);
    for (std::size_t i = 0; i < 1000; ++i) ++counts[sp.data.label(i)];
    for (std::size_t c : counts) EXPECT_EQ(c, 200u);
  }
}

TEST(Spiral, GlobalMaximumIsOne) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto sp = gen_spiral(seed);
    EXPECT_EQ(*std::ranges::max_element(sp.data.inputs.values()), 1.0);
  }
}

TEST(Spiral, PerVectorMaximumIsOne) {
  SpiralOptions opt;
  opt.normalization = SpiralNormalization::PerVector;
  const auto sp = gen_spiral(3, opt);
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const double m = std::max(sp.data.inputs(i, 0), sp.data.inputs(i, 1));
    if (m == 1.0) continue;
    // Both coordinates were non-positive: divided by the largest magnitude.
    ++flagged;
    EXPECT_EQ(std::min(sp.data.inputs(i, 0), sp.data.inputs(i, 1)), -1.0);
  }
  EXPECT_EQ(flagged, sp.abs_normalized_rows);
}

TEST(Spiral, RadiusAndAngleFormulas) {
  EXPECT_DOUBLE_EQ(spiral_radius(1), 0.05);
  EXPECT_DOUBLE_EQ(spiral_radius(200), 0.05 + 0.95 * 199.0 / 200.0);
  EXPECT_DOUBLE_EQ(spiral_angle(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(spiral_angle(3, 1), 7.4);
  EXPECT_DOUBLE_EQ(spiral_angle(2, 101), 3.7 + 3.7 * 100.0 / 200.0);
}

TEST(Spiral, NoiselessPointsLieOnTheArms) {
  SpiralOptions opt;
  opt.angle_noise_sd = 0.0;
  const auto sp = gen_spiral(1, opt);
  double scale = 0.0;
  for (std::size_t j = 1; j <= 5; ++j) {
    for (std::size_t m = 1; m <= 200; ++m) {
      const double t = spiral_angle(j, m);
      scale = std::max({scale, spiral_radius(m) * std::sin(t), spiral_radius(m) * std::cos(t)});
    }
  }
  // Every generated row must match exactly one arm point, up to the global scale.
  for (std::size_t i = 0; i < 1000; ++i) {
    const std::size_t j = sp.data.label(i) + 1;
    double best = INFINITY;
    for (std::size_t m = 1; m <= 200; ++m) {
      const double t = spiral_angle(j, m);
      const double dx = sp.data.inputs(i, 0) - spiral_radius(m) * std::sin(t) / scale;
      const double dy = sp.data.inputs(i, 1) - spiral_radius(m) * std::cos(t) / scale;
      best = std::min(best, std::hypot(dx, dy));
    }
    EXPECT_LT(best, 1e-12);
  }
}

TEST(Spiral, DeterministicAndSeedDependent) {
  EXPECT_EQ(gen_spiral(4).data, gen_spiral(4).data);
  EXPECT_NE(gen_spiral(4).data, gen_spiral(5).data);
}

TEST(LabelCorruption, AlwaysChangesClass) {
  const auto sp = gen_spiral(2);
  const auto ds = corrupt_labels(sp.data, 0.75, 6);
  const auto rows = corrupted_rows(ds);
  EXPECT_EQ(rows.size(), 250u);
  for (std::size_t i : rows) EXPECT_NE(ds.label(i), sp.data.label(i));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.informative[i]) EXPECT_EQ(ds.label(i), sp.data.label(i));
  }
  ds.validate();
  double total = 0.0;
  for (double v : ds.outputs.values()) total += v;
  EXPECT_EQ(total, 1000.0);
  EXPECT_EQ(corrupt_labels(sp.data, 1.0, 6), sp.data);
}

TEST(LabelCorruption, RejectsRegression) {
  const auto gen = gen_regression(20, 2, 1, 3, 10.0, 1);
  EXPECT_THROW(corrupt_labels(gen.data, 0.75, 1), DomainError);
}

TEST(Corruption, CommutesWithRowOrder) {
  const auto gen = gen_regression(24, 3, 1, 4, 10.0, 16);
  const auto sp = gen_spiral(7).data.subset(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  std::vector<std::size_t> perm(24);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> inverse(24);
  for (std::size_t k = 0; k < 24; ++k) inverse[perm[k]] = k;

  const std::vector<std::size_t> rows = {2, 9, 17, 5};
  std::vector<std::size_t> mapped;
  for (std::size_t i : rows) mapped.push_back(inverse[i]);

  const Dataset shuffled = gen.data.subset(perm);
  EXPECT_EQ(corrupt_outputs_uniform_at(gen.data, gen.truth, rows, 4).subset(perm),
            corrupt_outputs_uniform_at(shuffled, gen.truth, mapped, 4));
  EXPECT_EQ(corrupt_inputs_at(gen.data, rows, 4).subset(perm), corrupt_inputs_at(shuffled, mapped, 4));

  std::vector<std::size_t> perm12(perm.begin(), perm.end());
  std::erase_if(perm12, [](std::size_t i) { return i >= 12; });
  std::vector<std::size_t> inv12(12);
  for (std::size_t k = 0; k < 12; ++k) inv12[perm12[k]] = k;
  const std::vector<std::size_t> label_rows = {1, 7, 10};
  std::vector<std::size_t> label_mapped;
  for (std::size_t i : label_rows) label_mapped.push_back(inv12[i]);
  EXPECT_EQ(corrupt_labels_at(sp, label_rows, 5).subset(perm12), corrupt_labels_at(sp.subset(perm12), label_mapped, 5));
}

TEST(Csv, ToyFileRoundTrips) {
  const auto path = temp_file("toy.csv", "a,b,y\n1.5,-2,0.25\n0,3e2,1\n-4,0.5,\"2\"\n");
  const auto ds = load_csv(path.string(), "y", Task::Regression);
  ASSERT_EQ(ds.size(), 3u);
  const std::vector<double> want = {1.5, -2, 0, 300, -4, 0.5};
  EXPECT_TRUE(std::ranges::equal(ds.inputs.values(), want));
  EXPECT_EQ(ds.outputs(2, 0), 2.0);

  const auto out = std::filesystem::temp_directory_path() / "deepmom_toy_out.csv";
  write_csv(ds, out.string());
  EXPECT_EQ(load_csv(out.string(), "y", Task::Regression), ds);
}

TEST(Csv, CategoricalLabelsBecomeOneHot) {
  const auto path = temp_file("cls.csv", "label,x\nb,1\na,2\nc,3\na,4\n");
  const auto ds = load_csv(path.string(), "label", Task::Classification);
  EXPECT_EQ(ds.output_dim(), 3u);
  EXPECT_EQ(ds.label(0), 1u);
  EXPECT_EQ(ds.label(1), 0u);
  EXPECT_EQ(ds.label(2), 2u);
  EXPECT_EQ(ds.inputs(3, 0), 4.0);
  ds.validate();
}

TEST(Csv, SpiralRoundTrip) {
  const auto sp = gen_spiral(9).data;
  const auto out = std::filesystem::temp_directory_path() / "deepmom_spiral.csv";
  write_csv(sp, out.string());
  const auto back = load_csv(out.string(), "label", Task::Classification);
  EXPECT_EQ(back.outputs, sp.outputs);
  for (std::size_t k = 0; k < sp.inputs.values().size(); ++k) {
    EXPECT_EQ(back.inputs.values()[k], sp.inputs.values()[k]);
  }
}

TEST(Csv, NormalizationGivesUnitColumns) {
  const auto path = temp_file("norm.csv", "x1,x2,y\n1,2,0\n3,-4,1\n5,6,2\n");
  const auto ds = load_csv(path.string(), "y", Task::Regression, true);
  for (std::size_t j = 0; j < 2; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < 3; ++i) ss += ds.inputs(i, j) * ds.inputs(i, j);
    EXPECT_NEAR(ss, 1.0, 1e-12);
  }
}

TEST(Csv, ParseErrorsCarryLocation) {
  const auto ragged = temp_file("ragged.csv", "x,y\n1,2\n3\n");
  try {
    load_csv(ragged.string(), "y", Task::Regression);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
  }
  const auto text = temp_file("text.csv", "x,z,y\n1,2,3\n4,abc,5\n");
  try {
    load_csv(text.string(), "y", Task::Regression);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 2u);
  }
  EXPECT_THROW(load_csv(text.string(), "missing", Task::Regression), ParseError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", "y", Task::Regression), ParseError);
}

}  // namespace
}  // namespace deepmom::data
