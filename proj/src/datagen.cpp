#include "deepmom/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "deepmom/errors.hpp"
#include "deepmom/rng.hpp"

namespace deepmom::data {

namespace {

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void check_fraction(double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw ConfigError("informative fraction must lie in (0, 1]");
}

void check_truth(const GroundTruth& truth, const Dataset& ds) {
  if (ds.task != Task::Regression) throw DomainError("output corruption needs regression data");
  if (truth.params.architecture().input_dim != ds.input_dim() ||
      truth.params.architecture().output_dim != ds.output_dim()) {
    throw ShapeError("ground truth does not match the data dimensions");
  }
}

}  // namespace

void normalize_columns(Matrix& inputs) {
  for (std::size_t j = 0; j < inputs.cols(); ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < inputs.rows(); ++i) ss += inputs(i, j) * inputs(i, j);
    if (ss == 0.0) continue;
    const double s = std::sqrt(ss);
    for (std::size_t i = 0; i < inputs.rows(); ++i) inputs(i, j) /= s;
  }
}

RegressionData gen_regression(std::size_t n, std::size_t p, std::size_t depth, std::size_t width,
                              double snr, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw ConfigError("sample size must be even and at least 2");
  if (p == 0 || width == 0) throw ConfigError("dimensions must be positive");
  if (!(snr > 0.0)) throw ConfigError("signal-to-noise ratio must be positive");

  Rng rng(derive_seed(seed, {10}));
  RegressionData out;
  Dataset& ds = out.data;
  ds.task = Task::Regression;
  ds.inputs = Matrix(n, p);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : ds.inputs.values()) v = gauss(rng);
  normalize_columns(ds.inputs);

  const auto arch = nn::Architecture::uniform(p, 1, depth, width);
  out.truth.params = nn::init_params(arch, nn::InitScheme::uniform(-1.0, 1.0), derive_seed(seed, {11}));

  const std::vector<double> clean = clean_outputs(out.truth, ds);
  out.truth.noise_sd = std::isinf(snr) ? 0.0 : sample_sd(clean) / snr;
  ds.outputs = Matrix(n, 1);
  Rng noise_rng(derive_seed(seed, {12}));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    ds.outputs(i, 0) = clean[i];
    if (out.truth.noise_sd > 0.0) ds.outputs(i, 0) += out.truth.noise_sd * noise(noise_rng);
  }
  ds.informative.assign(n, 1);
  return out;
}

std::vector<double> clean_outputs(const GroundTruth& truth, const Dataset& ds) {
  const Matrix out = nn::forward_all(truth.params, ds.inputs);
  std::vector<double> clean(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) clean[i] = out(i, 0);
  return clean;
}

std::vector<std::size_t> choose_outliers(std::size_t n, double informative_frac, std::uint64_t seed) {
  check_fraction(informative_frac);
  const auto count = static_cast<std::size_t>(std::llround((1.0 - informative_frac) * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

Dataset corrupt_outputs_uniform_at(const Dataset& ds, const GroundTruth& truth,
                                   std::span<const std::size_t> rows, std::uint64_t seed) {
  check_truth(truth, ds);
  Dataset out = ds;
  if (rows.empty()) return out;
  const std::vector<double> clean = clean_outputs(truth, ds);
  double a = 0.0;
  for (double v : clean) a = std::max(a, std::abs(v));
  Rng rng(seed);
  std::uniform_real_distribution<double> shift(3.0 * a, 5.0 * a);
  for (std::size_t i : rows) {
    if (i >= ds.size()) throw ShapeError("outlier row out of range");
    out.outputs(i, 0) = clean[i] + shift(rng);
    out.informative[i] = 0;
  }
  return out;
}

Dataset corrupt_outputs_uniform(const Dataset& ds, const GroundTruth& truth, double informative_frac,
                                std::uint64_t seed) {
  const auto rows = choose_outliers(ds.size(), informative_frac, derive_seed(seed, {20}));
  return corrupt_outputs_uniform_at(ds, truth, rows, derive_seed(seed, {21}));
}

Dataset corrupt_outputs_student_t(const Dataset& ds, const GroundTruth& truth, double df,
                                  std::uint64_t seed) {
  if (!(df > 0.0)) throw ConfigError("degrees of freedom must be positive");
  check_truth(truth, ds);
  Dataset out = ds;
  const std::vector<double> clean = clean_outputs(truth, ds);
  Rng rng(seed);
  std::student_t_distribution<double> noise(df);
  for (std::size_t i = 0; i < ds.size(); ++i) out.outputs(i, 0) = clean[i] + noise(rng);
  out.informative.assign(ds.size(), 1);
  return out;
}

Dataset corrupt_inputs_at(const Dataset& ds, std::span<const std::size_t> rows, std::uint64_t seed) {
  Dataset out = ds;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i : rows) {
    if (i >= ds.size()) throw ShapeError("outlier row out of range");
    for (double& v : out.inputs.row(i)) v += gauss(rng);
    out.informative[i] = 0;
  }
  return out;
}

Dataset corrupt_inputs(const Dataset& ds, double informative_frac, std::uint64_t seed) {
  const auto rows = choose_outliers(ds.size(), informative_frac, derive_seed(seed, {20}));
  return corrupt_inputs_at(ds, rows, derive_seed(seed, {22}));
}

Dataset corrupt_labels_at(const Dataset& ds, std::span<const std::size_t> rows, std::uint64_t seed) {
  if (ds.task != Task::Classification) throw DomainError("label corruption needs classification data");
  const std::size_t c = ds.output_dim();
  Dataset out = ds;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> other(0, c - 2);
  for (std::size_t i : rows) {
    if (i >= ds.size()) throw ShapeError("outlier row out of range");
    const std::size_t old = ds.label(i);
    std::size_t fresh = other(rng);
    if (fresh >= old) ++fresh;
    for (std::size_t j = 0; j < c; ++j) out.outputs(i, j) = j == fresh ? 1.0 : 0.0;
    out.informative[i] = 0;
  }
  return out;
}

Dataset corrupt_labels(const Dataset& ds, double informative_frac, std::uint64_t seed) {
  if (ds.task != Task::Classification) throw DomainError("label corruption needs classification data");
  const auto rows = choose_outliers(ds.size(), informative_frac, derive_seed(seed, {20}));
  return corrupt_labels_at(ds, rows, derive_seed(seed, {23}));
}

double spiral_radius(std::size_t m) {
  return 0.05 + (1.0 - 0.05) * static_cast<double>(m - 1) / static_cast<double>(kSpiralClassSize);
}

double spiral_angle(std::size_t j, std::size_t m) {
  return static_cast<double>(j - 1) * 3.7 + 3.7 * static_cast<double>(m - 1) / static_cast<double>(kSpiralClassSize);
}

SpiralData gen_spiral(std::uint64_t seed, const SpiralOptions& options) {
  if (!(options.angle_noise_sd >= 0.0)) throw ConfigError("angle noise must be non-negative");
  constexpr std::size_t n = kSpiralClasses * kSpiralClassSize;
  Rng rng(derive_seed(seed, {30}));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix x(n, 2);
  std::vector<std::size_t> label(n);
  for (std::size_t j = 0; j < kSpiralClasses; ++j) {
    for (std::size_t m = 0; m < kSpiralClassSize; ++m) {
      const double r = spiral_radius(m + 1);
      const double t = spiral_angle(j + 1, m + 1) + options.angle_noise_sd * gauss(rng);
      const std::size_t i = j * kSpiralClassSize + m;
      x(i, 0) = r * std::sin(t);
      x(i, 1) = r * std::cos(t);
      label[i] = j;
    }
  }

  SpiralData out;
  if (options.normalization == SpiralNormalization::PerVector) {
    for (std::size_t i = 0; i < n; ++i) {
      double d = std::max(x(i, 0), x(i, 1));
      if (!(d > 0.0)) {
        d = std::max(std::abs(x(i, 0)), std::abs(x(i, 1)));
        ++out.abs_normalized_rows;
      }
      if (d > 0.0) {
        x(i, 0) /= d;
        x(i, 1) /= d;
      }
    }
  } else {
    double d = *std::ranges::max_element(x.values());
    for (double& v : x.values()) v /= d;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(seed, {31}));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  Dataset& ds = out.data;
  ds.task = Task::Classification;
  ds.inputs = Matrix(n, 2);
  ds.outputs = Matrix(n, kSpiralClasses);
  ds.informative.assign(n, 1);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    ds.inputs(k, 0) = x(i, 0);
    ds.inputs(k, 1) = x(i, 1);
    ds.outputs(k, label[i]) = 1.0;
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", row, fields.size() + 1);
  fields.push_back(trim(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column, Task task, bool normalize) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);

  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (!trim(line).empty()) {
      header = split_fields(line, row);
      break;
    }
  }
  if (header.empty()) throw ParseError("missing header row", 0, 0);
  const auto label_it = std::ranges::find(header, label_column);
  if (label_it == header.end()) throw ParseError("label column '" + label_column + "' not found", row, 0);
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t p = header.size() - 1;
  if (p == 0) throw ParseError("no feature columns", row, 0);

  std::vector<double> features;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, row);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       row, 0);
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_col) {
        labels.push_back(fields[c]);
        continue;
      }
      double v = 0.0;
      if (!parse_double(fields[c], v)) throw ParseError("non-numeric feature '" + fields[c] + "'", row, c + 1);
      features.push_back(v);
    }
    if (task == Task::Regression) {
      double v = 0.0;
      if (!parse_double(labels.back(), v)) {
        throw ParseError("non-numeric regression label '" + labels.back() + "'", row, label_col + 1);
      }
    } else if (labels.back().empty()) {
      throw ParseError("empty class label", row, label_col + 1);
    }
  }
  const std::size_t n = labels.size();
  if (n == 0) throw ParseError("no data rows", 0, 0);

  Dataset ds;
  ds.task = task;
  ds.inputs = Matrix(n, p);
  std::ranges::copy(features, ds.inputs.values().begin());
  ds.informative.assign(n, 1);
  if (task == Task::Regression) {
    ds.outputs = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) parse_double(labels[i], ds.outputs(i, 0));
  } else {
    std::map<std::string, std::size_t> classes;
    for (const auto& l : labels) classes.emplace(l, 0);
    if (classes.size() < 2) throw ParseError("classification needs at least two distinct labels", 0, 0);
    std::size_t next = 0;
    for (auto& [name, idx] : classes) idx = next++;
    ds.outputs = Matrix(n, classes.size());
    for (std::size_t i = 0; i < n; ++i) ds.outputs(i, classes.at(labels[i])) = 1.0;
  }
  if (normalize) normalize_columns(ds.inputs);
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'", 0, 0);
  for (std::size_t j = 0; j < ds.input_dim(); ++j) out << 'x' << (j + 1) << ',';
  out << (ds.task == Task::Regression ? "y" : "label") << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.x(i)) out << v << ',';
    if (ds.task == Task::Regression) out << ds.y(i)[0];
    else out << ds.label(i);
    out << '\n';
  }
}

}  // namespace deepmom::data
