#pragma once

#include <Eigen/Core>

#include <span>

namespace flarecast::nn {

inline constexpr double kProbabilityClamp = 1e-12;

/// -[y ln p + (1 - y) ln(1 - p)] with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(double p, double y);

/// d bce / d p = (p - y) / (p (1 - p)) at the clamped p.
double bce_gradient(double p, double y);

/// Mean binary cross-entropy over a batch of probabilities.
double bce_loss(std::span<const double> p, std::span<const double> y);

/// Mean loss of sigmoid(logits) and its gradient with respect to each logit,
/// (sigmoid(z) - y) / batch.
double bce_with_logits(const Eigen::VectorXd& logits, std::span<const double> y, Eigen::VectorXd* dlogits);

} // namespace flarecast::nn
