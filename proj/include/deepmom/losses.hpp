#pragma once

// Per-sample losses and their derivatives with respect to the network output.

#include <span>
#include <string>
#include <vector>

#include "deepmom/errors.hpp"

namespace deepmom::loss {

enum class LossTag { SE, SCE, AD, Huber };

struct LossKind {
  LossTag tag = LossTag::SE;
  double huber_k = 0.0;  // only meaningful for Huber

  static LossKind se() { return {LossTag::SE, 0.0}; }
  static LossKind sce() { return {LossTag::SCE, 0.0}; }
  static LossKind ad() { return {LossTag::AD, 0.0}; }
  static LossKind huber(double k);

  bool is_classification() const noexcept { return tag == LossTag::SCE; }
  /// Throws ConfigError for a non-positive Huber threshold.
  void validate() const;

  bool operator==(const LossKind&) const = default;
};

std::string to_string(const LossKind& kind);
/// Parses "se", "sce", "ad", "huber" (case-insensitive); `huber_k` applies to Huber.
LossKind parse_loss(const std::string& name, double huber_k = 1.0);

/// Squared error (y - yhat)^2, absolute deviation |y - yhat| and the Huber
/// loss for c = 1; soft-max cross entropy for a one-hot y with c >= 2.
double loss_value(const LossKind& kind, std::span<const double> y, std::span<const double> yhat);

/// d loss / d yhat, written into `out` (length c).
void loss_grad(const LossKind& kind, std::span<const double> y, std::span<const double> yhat,
               std::span<double> out);

std::vector<double> loss_grad(const LossKind& kind, std::span<const double> y,
                              std::span<const double> yhat);

/// Soft-max with the maximum logit subtracted first.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace deepmom::loss
