#pragma once

// Synthetic data with known ground truth, corruption protocols, and CSV I/O.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "deepmom/dataset.hpp"
#include "deepmom/nn.hpp"

namespace deepmom::data {

/// The generating network g* and the noise level of the clean data.
struct GroundTruth {
  nn::NetworkParams params;
  double noise_sd = 0.0;
};

struct RegressionData {
  Dataset data;
  GroundTruth truth;
};

/// Signal-to-noise value meaning "no noise at all".
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// n samples with p standard Gaussian inputs, each input column rescaled to
/// unit sum of squares, outputs from a ReLU network of `depth` hidden layers
/// of `width` units with U(-1, 1) weights and biases, plus Gaussian noise of
/// standard deviation sd(clean outputs) / snr. Requires n even and >= 2.
RegressionData gen_regression(std::size_t n, std::size_t p, std::size_t depth, std::size_t width,
                              double snr, std::uint64_t seed);

/// g*(x_i) for every row of `ds`.
std::vector<double> clean_outputs(const GroundTruth& truth, const Dataset& ds);

/// round((1 - informative_frac) * n) distinct rows drawn uniformly.
std::vector<std::size_t> choose_outliers(std::size_t n, double informative_frac, std::uint64_t seed);

/// Replaces the noise of the listed rows with U[3A, 5A] draws, A = max_i |g*(x_i)|
/// over `ds`. Draws are assigned in the order of `rows`.
Dataset corrupt_outputs_uniform_at(const Dataset& ds, const GroundTruth& truth,
                                   std::span<const std::size_t> rows, std::uint64_t seed);
Dataset corrupt_outputs_uniform(const Dataset& ds, const GroundTruth& truth, double informative_frac,
                                std::uint64_t seed);

/// Replaces every noise term with an i.i.d. Student-t(df) draw. The mask is
/// left all-informative: no subset is singled out.
Dataset corrupt_outputs_student_t(const Dataset& ds, const GroundTruth& truth, double df,
                                  std::uint64_t seed);

/// Adds i.i.d. N(0, 1) to every input entry of the listed rows; outputs are untouched.
Dataset corrupt_inputs_at(const Dataset& ds, std::span<const std::size_t> rows, std::uint64_t seed);
Dataset corrupt_inputs(const Dataset& ds, double informative_frac, std::uint64_t seed);

/// Moves each listed row to a uniformly drawn different class.
Dataset corrupt_labels_at(const Dataset& ds, std::span<const std::size_t> rows, std::uint64_t seed);
Dataset corrupt_labels(const Dataset& ds, double informative_frac, std::uint64_t seed);

enum class SpiralNormalization {
  /// Divide each input vector by its own largest element (by its largest
  /// absolute element when that maximum is not positive).
  PerVector,
  /// Divide every input by the largest element over the whole sample.
  Global,
};

struct SpiralOptions {
  double angle_noise_sd = 0.25;
  SpiralNormalization normalization = SpiralNormalization::Global;
};

struct SpiralData {
  Dataset data;
  /// Rows whose largest element was not positive (PerVector only).
  std::size_t abs_normalized_rows = 0;
};

inline constexpr std::size_t kSpiralClasses = 5;
inline constexpr std::size_t kSpiralClassSize = 200;

/// Radius of the m-th point of an arm, m in {1, ..., 200}.
double spiral_radius(std::size_t m);
/// Noise-free angle of the m-th point of arm j, j in {1, ..., 5}.
double spiral_angle(std::size_t j, std::size_t m);

/// Five interleaved spiral arms of 200 points in the plane, shuffled.
SpiralData gen_spiral(std::uint64_t seed, const SpiralOptions& options = {});

/// Reads a comma-separated file with a header row. Feature columns must be
/// numeric. Classification labels are one-hot encoded with classes ordered
/// lexicographically; regression labels must be numeric. With `normalize`,
/// every feature column is rescaled to unit sum of squares.
Dataset load_csv(const std::string& path, const std::string& label_column, Task task,
                 bool normalize = false);

/// Writes inputs as x1..xp followed by `y` (regression) or `label` (class index).
void write_csv(const Dataset& ds, const std::string& path);

/// Rescales each input column to unit sum of squares (zero columns untouched).
void normalize_columns(Matrix& inputs);

}  // namespace deepmom::data
