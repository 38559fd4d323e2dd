#pragma once

#include "flarecast/nn/tensor.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace flarecast::nn {

enum class OptimizerKind { sgd, adam };

const char* to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(std::string_view s);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Plain SGD (v -= lr g) or Adam with bias-corrected moments. Moment state is
/// bound to the parameter order of the first step() call.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg = {});

    /// Applies one update from the accumulated gradients. Throws
    /// TrainingAborted (epoch/batch -1) naming the parameter if any gradient
    /// is NaN or infinite; no parameter is modified in that case.
    void step(std::span<Parameter* const> params);

    const OptimizerConfig& config() const { return cfg_; }
    long steps_taken() const { return t_; }

private:
    OptimizerConfig cfg_;
    long t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

double max_abs_gradient(std::span<Parameter* const> params);

} // namespace flarecast::nn
