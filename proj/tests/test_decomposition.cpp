#include "flarecast/decomposition.hpp"
#include "flarecast/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

using namespace flarecast;
using namespace flarecast::decomposition;

namespace {

double variance(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return ss / static_cast<double>(v.size());
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = g(rng);
    }
    return v;
}

} // namespace

TEST_CASE("hand-computed moving average with replicated edges") {
    const auto d = decompose(std::vector<double>{0, 1, 2, 3, 4}, 3);
    CHECK(d.trend[0] == doctest::Approx(1.0 / 3.0));
    CHECK(d.trend[1] == doctest::Approx(1.0));
    CHECK(d.trend[2] == doctest::Approx(2.0));
    CHECK(d.trend[3] == doctest::Approx(3.0));
    CHECK(d.trend[4] == doctest::Approx(11.0 / 3.0));
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(d.seasonal[i] == doctest::Approx(d.original[i] - d.trend[i]));
    }
}

TEST_CASE("constant series and kernel 1 give zero seasonal") {
    const std::vector<double> c(17, 4.25);
    for (int k : {1, 3, 5, 17}) {
        const auto d = decompose(c, k);
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(d.trend[i] == 4.25);
            CHECK(d.seasonal[i] == 0.0);
        }
    }
    std::mt19937_64 rng(1);
    const auto x = random_series(rng, 40);
    const auto d = decompose(x, 1);
    CHECK(d.trend == x);
    for (double s : d.seasonal) {
        CHECK(s == 0.0);
    }
}

TEST_CASE("kernel validation") {
    const std::vector<double> x(10, 1.0);
    CHECK_THROWS_AS(decompose(x, 4), ConfigError);
    CHECK_THROWS_AS(decompose(x, 0), ConfigError);
    CHECK_THROWS_AS(decompose(x, 11), ConfigError);
    CHECK_NOTHROW(decompose(x, 9));
    const auto d = decompose(x, 3);
    CHECK_THROWS_AS(second_pass_noise(d, 2), ConfigError);
}

TEST_CASE("reconstruction is exact to rounding") {
    std::mt19937_64 rng(10);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 5 + rng() % 496;
        int kmax = static_cast<int>(std::min<std::size_t>(49, n));
        kmax -= kmax % 2 == 0 ? 1 : 0;
        const int k = 1 + 2 * static_cast<int>(rng() % static_cast<std::uint64_t>((kmax + 1) / 2));
        const auto x = random_series(rng, n, std::pow(10.0, static_cast<double>(rng() % 12) - 6.0));
        const auto d = decompose(x, k);
        double max_abs = 0.0;
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            max_abs = std::max(max_abs, std::abs(x[i]));
            err = std::max(err, std::abs(x[i] - (d.trend[i] + d.seasonal[i])));
        }
        CHECK(err <= 8 * eps * max_abs);
        const auto d2 = second_pass_noise(d, 3);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(x[i] - (d2.trend[i] + d2.smoothed_seasonal[i] + d2.residual[i])) <= 16 * eps * max_abs);
        }
    }
}

TEST_CASE("trend has no more variance than the series") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_series(rng, 10 + rng() % 200);
        const int k = 3 + 2 * static_cast<int>(rng() % 4);
        CHECK(variance(decompose(x, k).trend) <= variance(x) * (1 + 1e-12));
    }
}

TEST_CASE("decompose is linear in the series") {
    std::mt19937_64 rng(13);
    const auto x = random_series(rng, 64);
    const auto y = random_series(rng, 64);
    std::vector<double> z(64);
    for (std::size_t i = 0; i < 64; ++i) {
        z[i] = 2.5 * x[i] - 0.75 * y[i];
    }
    const auto tx = decompose(x, 7).trend;
    const auto ty = decompose(y, 7).trend;
    const auto tz = decompose(z, 7).trend;
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(tz[i] == doctest::Approx(2.5 * tx[i] - 0.75 * ty[i]).epsilon(1e-12));
    }
}

TEST_CASE("interior trend is shift equivariant") {
    std::mt19937_64 rng(14);
    const auto x = random_series(rng, 100);
    const std::vector<double> shifted(x.begin() + 5, x.end());
    const int k = 9;
    const auto a = decompose(x, k).trend;
    const auto b = decompose(shifted, k).trend;
    for (std::size_t i = 4; i + 4 < b.size(); ++i) {
        CHECK(b[i] == doctest::Approx(a[i + 5]).epsilon(1e-12));
    }
}

TEST_CASE("second pass with kernel 1 leaves no residual") {
    std::mt19937_64 rng(15);
    const auto d = second_pass_noise(decompose(random_series(rng, 50), 5), 1);
    CHECK(d.kernel2 == 1);
    for (double r : d.residual) {
        CHECK(r == 0.0);
    }
}

TEST_CASE("white noise mostly survives as residual") {
    std::mt19937_64 rng(16);
    const auto x = random_series(rng, 20000);
    const auto d = second_pass_noise(decompose(x, 49), 49);
    const double ratio = variance(d.residual) / variance(x);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("seasonal component is recovered from a three-part signal") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 0.05);
    const std::size_t n = 1000;
    std::vector<double> x(n);
    std::vector<double> wave(n);
    for (std::size_t i = 0; i < n; ++i) {
        wave[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 100.0);
        x[i] = 0.01 * static_cast<double>(i) + wave[i] + noise(rng);
    }
    const auto d = second_pass_noise(decompose(x, 51), 5);
    double sxy = 0, sxx = 0, syy = 0;
    const double mx = std::accumulate(d.smoothed_seasonal.begin(), d.smoothed_seasonal.end(), 0.0) / n;
    const double my = std::accumulate(wave.begin(), wave.end(), 0.0) / n;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (d.smoothed_seasonal[i] - mx) * (wave[i] - my);
        sxx += (d.smoothed_seasonal[i] - mx) * (d.smoothed_seasonal[i] - mx);
        syy += (wave[i] - my) * (wave[i] - my);
    }
    CHECK(sxy / std::sqrt(sxx * syy) > 0.9);
}

TEST_CASE("decomposition dump has one row per sample") {
    const auto d = second_pass_noise(decompose(std::vector<double>{1, 2, 3, 4, 5, 6}, 3), 3);
    std::ostringstream out;
    write_decomposition(out, d);
    const std::string text = out.str();
    CHECK(text.rfind("x,trend,seasonal,smoothed_seasonal,residual\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}
