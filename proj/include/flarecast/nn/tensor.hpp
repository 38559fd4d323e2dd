#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flarecast::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// T time steps, each a (batch x features) matrix.
using Sequence = std::vector<Matrix>;

/// Dense row-major array of doubles with an explicit shape.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    /// Throws DomainError if values.size() differs from the shape's product.
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Rows/cols of the 2-D view; a 1-D tensor is one row.
    std::size_t rows() const;
    std::size_t cols() const;
    MatrixMap matrix();
    ConstMatrixMap matrix() const;

    void fill(double v);

    bool operator==(const Tensor&) const = default;

private:
    std::vector<std::size_t> shape_;
    // Eigen-aligned so vectorized kernels see the same alignment on every run;
    // with plain malloc alignment, reduction order (and the last ulp) varies.
    std::vector<double, Eigen::aligned_allocator<double>> values_;
};

/// A trainable value and its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, std::vector<std::size_t> shape)
        : name(std::move(n)), value(shape), grad(shape) {}
};

} // namespace flarecast::nn
