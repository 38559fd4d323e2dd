#pragma once

#include "flarecast/windows.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>

namespace flarecast::testing {

/// Regular-mode windows with a planted rule: a window is large iff its max
/// feature exceeds 0.8. Background values are uniform in [0, 0.5]; each
/// large window carries one spike in (0.85, 1] at a random step.
inline windows::WindowSet planted_rule_windows(std::size_t n, double large_fraction, std::uint64_t seed,
                                               int w = 24) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> background(0.0, 0.5);
    std::uniform_real_distribution<double> spike(0.85, 1.0);
    std::uniform_int_distribution<int> position(0, w - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_large = static_cast<std::size_t>(std::llround(large_fraction * static_cast<double>(n)));
    std::vector<bool> large(n, false);
    for (std::size_t i = 0; i < n_large; ++i) {
        large[order[i]] = true;
    }

    windows::WindowSet ws;
    ws.w = w;
    ws.d = 1;
    ws.mode = windows::SeriesMode::regular;
    ws.provenance = "planted-rule";
    for (std::size_t i = 0; i < n; ++i) {
        windows::Window win;
        win.features.resize(static_cast<std::size_t>(w));
        for (auto& v : win.features) {
            v = background(rng);
        }
        if (large[i]) {
            win.features[static_cast<std::size_t>(position(rng))] = spike(rng);
        }
        const double mx = *std::max_element(win.features.begin(), win.features.end());
        win.large = mx > 0.8;
        win.class_label = win.large ? 4 : 2;
        win.anchor_index = i;
        ws.windows.push_back(std::move(win));
    }
    return ws;
}

} // namespace flarecast::testing
