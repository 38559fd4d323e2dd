#include "flarecast/nn/optimizer.hpp"

#include "flarecast/errors.hpp"

#include <cmath>
#include <string>

namespace flarecast::nn {

const char* to_string(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind optimizer_from_string(std::string_view s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
    if (!(cfg_.learning_rate > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
}

double max_abs_gradient(std::span<Parameter* const> params) {
    double m = 0.0;
    for (const Parameter* p : params) {
        for (double g : p->grad.values()) {
            m = std::isfinite(g) ? std::max(m, std::abs(g)) : INFINITY;
        }
    }
    return m;
}

void Optimizer::step(std::span<Parameter* const> params) {
    for (const Parameter* p : params) {
        for (double g : p->grad.values()) {
            if (!std::isfinite(g)) {
                throw TrainingAborted("non-finite gradient in parameter " + p->name, -1, -1, INFINITY);
            }
        }
    }

    if (cfg_.kind == OptimizerKind::sgd) {
        for (Parameter* p : params) {
            auto v = p->value.values();
            auto g = p->grad.values();
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] -= cfg_.learning_rate * g[i];
            }
        }
        ++t_;
        return;
    }

    if (m_.empty()) {
        for (const Parameter* p : params) {
            m_.emplace_back(p->value.size(), 0.0);
            v_.emplace_back(p->value.size(), 0.0);
        }
    }
    if (m_.size() != params.size()) {
        throw StateError("optimizer called with a different parameter list");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto v = params[k]->value.values();
        auto g = params[k]->grad.values();
        auto& m1 = m_[k];
        auto& m2 = v_[k];
        for (std::size_t i = 0; i < v.size(); ++i) {
            m1[i] = cfg_.beta1 * m1[i] + (1.0 - cfg_.beta1) * g[i];
            m2[i] = cfg_.beta2 * m2[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m1[i] / bc1;
            const double vhat = m2[i] / bc2;
            v[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

} // namespace flarecast::nn
