#include "flarecast/nn/activation.hpp"

#include "flarecast/errors.hpp"

#include <cmath>
#include <string>

namespace flarecast::nn {

const char* to_string(Activation a) {
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation activation_from_string(std::string_view s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

double activate(Activation kind, double x) {
    switch (kind) {
    case Activation::identity:
        return x;
    case Activation::relu:
        return x > 0.0 ? x : 0.0;
    case Activation::tanh:
        return std::tanh(x);
    case Activation::sigmoid:
        if (x >= 0.0) {
            return 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            return e / (1.0 + e);
        }
    }
    return x;
}

double activate_derivative(Activation kind, double x) {
    switch (kind) {
    case Activation::identity:
        return 1.0;
    case Activation::relu:
        return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    case Activation::sigmoid: {
        const double s = activate(Activation::sigmoid, x);
        return s * (1.0 - s);
    }
    }
    return 1.0;
}

Matrix activate(Activation kind, const Matrix& x) {
    switch (kind) {
    case Activation::identity:
        return x;
    case Activation::relu:
        return x.cwiseMax(0.0);
    case Activation::tanh:
        return x.array().tanh().matrix();
    case Activation::sigmoid:
        return x.unaryExpr([](double v) { return activate(Activation::sigmoid, v); });
    }
    return x;
}

Matrix activate_derivative(Activation kind, const Matrix& x, const Matrix& y) {
    switch (kind) {
    case Activation::identity:
        return Matrix::Ones(x.rows(), x.cols());
    case Activation::relu:
        return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::tanh:
        return (1.0 - y.array().square()).matrix();
    case Activation::sigmoid:
        return (y.array() * (1.0 - y.array())).matrix();
    }
    return Matrix::Ones(x.rows(), x.cols());
}

} // namespace flarecast::nn
