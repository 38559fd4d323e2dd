#include "flarecast/nn/tensor.hpp"

#include "flarecast/errors.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace flarecast::nn {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
    if (values_.size() != element_count(shape_)) {
        throw DomainError("tensor value count does not match its shape");
    }
}

std::size_t Tensor::rows() const {
    if (shape_.size() <= 1) {
        return 1;
    }
    return size() / shape_.back();
}

std::size_t Tensor::cols() const {
    return shape_.empty() ? 1 : shape_.back();
}

MatrixMap Tensor::matrix() {
    return MatrixMap(values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

ConstMatrixMap Tensor::matrix() const {
    return ConstMatrixMap(values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

void Tensor::fill(double v) {
    std::fill(values_.begin(), values_.end(), v);
}

} // namespace flarecast::nn
