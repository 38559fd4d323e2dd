#pragma once

#include "flarecast/nn/tensor.hpp"

#include <string_view>

namespace flarecast::nn {

enum class Activation { identity, relu, tanh, sigmoid };

const char* to_string(Activation a);
Activation activation_from_string(std::string_view s);

/// relu(x) = max(0, x); tanh; sigmoid(x) = 1 / (1 + e^-x) evaluated without overflow.
double activate(Activation kind, double x);

/// d activate / dx at x. relu uses 0 at x = 0.
double activate_derivative(Activation kind, double x);

Matrix activate(Activation kind, const Matrix& x);

/// Derivative expressed through pre-activation x and output y (cheaper for tanh/sigmoid).
Matrix activate_derivative(Activation kind, const Matrix& x, const Matrix& y);

inline double sigmoid(double x) { return activate(Activation::sigmoid, x); }

} // namespace flarecast::nn
