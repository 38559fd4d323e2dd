#include "flarecast/nn/loss.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/nn/activation.hpp"

#include <algorithm>
#include <cmath>

namespace flarecast::nn {

namespace {

double clamp_probability(double p) {
    return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

} // namespace

double bce_loss(double p, double y) {
    const double q = clamp_probability(p);
    return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double bce_gradient(double p, double y) {
    const double q = clamp_probability(p);
    return (q - y) / (q * (1.0 - q));
}

double bce_loss(std::span<const double> p, std::span<const double> y) {
    if (p.size() != y.size() || p.empty()) {
        throw DomainError("bce_loss needs equal, nonzero lengths");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total += bce_loss(p[i], y[i]);
    }
    return total / static_cast<double>(p.size());
}

double bce_with_logits(const Eigen::VectorXd& logits, std::span<const double> y, Eigen::VectorXd* dlogits) {
    const auto n = static_cast<std::size_t>(logits.size());
    if (n != y.size() || n == 0) {
        throw DomainError("bce_with_logits needs equal, nonzero lengths");
    }
    if (dlogits) {
        dlogits->resize(logits.size());
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sigmoid(logits[static_cast<Eigen::Index>(i)]);
        total += bce_loss(p, y[i]);
        if (dlogits) {
            (*dlogits)[static_cast<Eigen::Index>(i)] = (p - y[i]) / static_cast<double>(n);
        }
    }
    return total / static_cast<double>(n);
}

} // namespace flarecast::nn
