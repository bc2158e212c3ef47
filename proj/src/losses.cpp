#include "deepmom/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace deepmom::loss {

LossKind LossKind::huber(double k) {
  LossKind kind{LossTag::Huber, k};
  kind.validate();
  return kind;
}

void LossKind::validate() const {
  if (tag == LossTag::Huber && !(huber_k > 0.0 && std::isfinite(huber_k))) {
    throw ConfigError("Huber threshold k must be positive and finite");
  }
}

std::string to_string(const LossKind& kind) {
  switch (kind.tag) {
    case LossTag::SE: return "SE";
    case LossTag::SCE: return "SCE";
    case LossTag::AD: return "AD";
    case LossTag::Huber: return "Huber";
  }
  return "?";
}

LossKind parse_loss(const std::string& name, double huber_k) {
  std::string s = name;
  std::ranges::transform(s, s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "se") return LossKind::se();
  if (s == "sce") return LossKind::sce();
  if (s == "ad") return LossKind::ad();
  if (s == "huber") return LossKind::huber(huber_k);
  throw ConfigError("unknown loss '" + name + "'");
}

namespace {

void check_regression(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != 1 || yhat.size() != 1) {
    throw DomainError("regression losses require a single output (c = 1)");
  }
}

// Returns the index of the hot entry; throws unless y is exactly one-hot.
std::size_t check_one_hot(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw ShapeError("target and prediction lengths differ");
  if (y.size() < 2) throw DomainError("soft-max cross entropy requires c >= 2");
  std::size_t hot = y.size();
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] == 1.0) {
      if (hot != y.size()) throw DomainError("target is not one-hot");
      hot = j;
    } else if (y[j] != 0.0) {
      throw DomainError("target is not one-hot");
    }
  }
  if (hot == y.size()) throw DomainError("target is not one-hot");
  return hot;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::ranges::max_element(p);
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

double loss_value(const LossKind& kind, std::span<const double> y, std::span<const double> yhat) {
  switch (kind.tag) {
    case LossTag::SE: {
      check_regression(y, yhat);
      const double r = y[0] - yhat[0];
      return r * r;
    }
    case LossTag::AD:
      check_regression(y, yhat);
      return std::abs(y[0] - yhat[0]);
    case LossTag::Huber: {
      kind.validate();
      check_regression(y, yhat);
      const double a = std::abs(y[0] - yhat[0]);
      const double k = kind.huber_k;
      return a <= k ? 0.5 * a * a : k * (a - 0.5 * k);
    }
    case LossTag::SCE: {
      const std::size_t hot = check_one_hot(y, yhat);
      // -log softmax_hot = log sum exp(z - max) - (z_hot - max)
      const double mx = *std::ranges::max_element(yhat);
      double total = 0.0;
      for (double z : yhat) total += std::exp(z - mx);
      return std::log(total) - (yhat[hot] - mx);
    }
  }
  return 0.0;
}

void loss_grad(const LossKind& kind, std::span<const double> y, std::span<const double> yhat,
               std::span<double> out) {
  if (out.size() != yhat.size()) throw ShapeError("gradient buffer has the wrong length");
  switch (kind.tag) {
    case LossTag::SE:
      check_regression(y, yhat);
      out[0] = 2.0 * (yhat[0] - y[0]);
      return;
    case LossTag::AD:
      check_regression(y, yhat);
      out[0] = sign(yhat[0] - y[0]);
      return;
    case LossTag::Huber: {
      kind.validate();
      check_regression(y, yhat);
      out[0] = std::clamp(yhat[0] - y[0], -kind.huber_k, kind.huber_k);
      return;
    }
    case LossTag::SCE: {
      const std::size_t hot = check_one_hot(y, yhat);
      const std::vector<double> p = softmax(yhat);
      for (std::size_t j = 0; j < p.size(); ++j) out[j] = p[j] - (j == hot ? 1.0 : 0.0);
      return;
    }
  }
}

std::vector<double> loss_grad(const LossKind& kind, std::span<const double> y,
                              std::span<const double> yhat) {
  std::vector<double> out(yhat.size());
  loss_grad(kind, y, yhat, out);
  return out;
}

}  // namespace deepmom::loss
