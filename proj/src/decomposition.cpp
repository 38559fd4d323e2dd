#include "flarecast/decomposition.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace flarecast::decomposition {

std::vector<double> moving_average(std::span<const double> values, int kernel) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw ConfigError("moving-average kernel must be a positive odd integer, got " + std::to_string(kernel));
    }
    const auto n = static_cast<long>(values.size());
    if (kernel > n) {
        throw ConfigError("moving-average kernel " + std::to_string(kernel) + " exceeds series length " +
                          std::to_string(n));
    }
    const long half = (kernel - 1) / 2;
    auto at = [&](long i) { return values[static_cast<std::size_t>(std::clamp(i, 0L, n - 1))]; };

    std::vector<double> out(values.size());
    // Summing offsets from the centre sample keeps flat stretches exactly flat.
    for (long i = 0; i < n; ++i) {
        const double centre = at(i);
        double sum = 0.0;
        for (long j = i - half; j <= i + half; ++j) {
            sum += at(j) - centre;
        }
        out[static_cast<std::size_t>(i)] = centre + sum / static_cast<double>(kernel);
    }
    return out;
}

DecomposedSeries decompose(std::span<const double> x, int kernel) {
    DecomposedSeries d;
    d.original.assign(x.begin(), x.end());
    d.kernel = kernel;
    d.trend = moving_average(x, kernel);
    d.seasonal.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        d.seasonal[i] = x[i] - d.trend[i];
    }
    return d;
}

DecomposedSeries second_pass_noise(const DecomposedSeries& d, int kernel2) {
    DecomposedSeries out = d;
    out.kernel2 = kernel2;
    out.smoothed_seasonal = moving_average(d.seasonal, kernel2);
    out.residual.resize(d.seasonal.size());
    for (std::size_t i = 0; i < d.seasonal.size(); ++i) {
        out.residual[i] = d.seasonal[i] - out.smoothed_seasonal[i];
    }
    return out;
}

void write_decomposition(std::ostream& out, const DecomposedSeries& d) {
    out << "x,trend,seasonal,smoothed_seasonal,residual\n";
    const bool second = d.kernel2 > 0;
    for (std::size_t i = 0; i < d.original.size(); ++i) {
        out << format_double(d.original[i]) << ',' << format_double(d.trend[i]) << ','
            << format_double(d.seasonal[i]) << ',';
        if (second) {
            out << format_double(d.smoothed_seasonal[i]) << ',' << format_double(d.residual[i]);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

} // namespace flarecast::decomposition
