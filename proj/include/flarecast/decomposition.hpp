#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace flarecast::decomposition {

/// Trend / seasonal split of a series. `residual` and `smoothed_seasonal` are
/// filled by second_pass_noise; after it, trend + smoothed_seasonal + residual
/// reproduces the original.
struct DecomposedSeries {
    std::vector<double> original;
    std::vector<double> trend;
    std::vector<double> seasonal;
    int kernel = 1;

    std::vector<double> smoothed_seasonal;
    std::vector<double> residual;
    int kernel2 = 0; // 0 until second_pass_noise has run
};

/// Centered moving average of odd width with (kernel-1)/2 edge-replicated
/// samples on each side; output length equals input length.
/// Throws ConfigError for an even kernel, kernel < 1 or kernel > values.size().
std::vector<double> moving_average(std::span<const double> values, int kernel);

/// trend = moving_average(x, kernel); seasonal = x - trend.
DecomposedSeries decompose(std::span<const double> x, int kernel);

/// smoothed_seasonal = moving_average(seasonal, kernel2); residual = seasonal - smoothed_seasonal.
DecomposedSeries second_pass_noise(const DecomposedSeries& d, int kernel2);

/// Columns "x,trend,seasonal,smoothed_seasonal,residual" (last two empty if absent).
void write_decomposition(std::ostream& out, const DecomposedSeries& d);

} // namespace flarecast::decomposition
