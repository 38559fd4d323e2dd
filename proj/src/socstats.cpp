#include "flarecast/socstats.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace flarecast::socstats {

namespace {

void require_normalizable(double alpha, double f_th) {
    if (!(alpha > 1.0)) {
        throw DomainError("power law with alpha <= 1 is not normalizable");
    }
    if (!(f_th > 0.0)) {
        throw DomainError("power-law threshold must be positive");
    }
}

} // namespace

double power_law_pdf(double f, double alpha, double f_th) {
    require_normalizable(alpha, f_th);
    if (f < f_th) {
        throw DomainError("power-law density is defined for f >= f_th only");
    }
    return (alpha - 1.0) / f_th * std::pow(f / f_th, -alpha);
}

double power_law_cdf(double f, double alpha, double f_th) {
    require_normalizable(alpha, f_th);
    if (f <= f_th) {
        return 0.0;
    }
    return 1.0 - std::pow(f / f_th, 1.0 - alpha);
}

double fit_alpha_mle(std::span<const double> samples, double f_th) {
    if (!(f_th > 0.0)) {
        throw DomainError("power-law threshold must be positive");
    }
    std::size_t n = 0;
    std::size_t above = 0;
    double log_sum = 0.0;
    for (double f : samples) {
        if (f >= f_th) {
            ++n;
            log_sum += std::log(f / f_th);
            above += f > f_th ? 1 : 0;
        }
    }
    if (above < 2) {
        throw DomainError("power-law MLE needs at least two samples above the threshold");
    }
    if (!(log_sum > 0.0)) {
        throw DomainError("degenerate power-law tail");
    }
    return 1.0 + static_cast<double>(n) / log_sum;
}

double ks_distance(std::span<const double> sorted_tail, double alpha, double f_th) {
    const auto n = static_cast<double>(sorted_tail.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_tail.size(); ++i) {
        const double model = power_law_cdf(sorted_tail[i], alpha, f_th);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, hi - model, model - lo});
    }
    return d;
}

PowerLawFit select_threshold_ks(std::span<const double> samples, const KsScanConfig& cfg) {
    if (samples.size() < cfg.min_samples) {
        throw DomainError("threshold scan needs at least " + std::to_string(cfg.min_samples) + " samples, got " +
                          std::to_string(samples.size()));
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (!(sorted.front() > 0.0)) {
        throw DomainError("power-law samples must be positive");
    }

    // suffix sums of ln f so each tail's MLE is O(1)
    const std::size_t n = sorted.size();
    std::vector<double> suffix_log(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        suffix_log[i] = suffix_log[i + 1] + std::log(sorted[i]);
    }

    // start index of each unique value that leaves at least min_tail samples
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < n; ++i) {
        if ((i == 0 || sorted[i] != sorted[i - 1]) && n - i >= cfg.min_tail) {
            starts.push_back(i);
        }
    }
    if (starts.empty()) {
        throw DomainError("no threshold candidate leaves " + std::to_string(cfg.min_tail) + " tail samples");
    }
    std::vector<std::size_t> candidates;
    if (starts.size() <= cfg.max_candidates) {
        candidates = starts;
    } else {
        const std::size_t m = std::max<std::size_t>(cfg.max_candidates, 2);
        for (std::size_t k = 0; k < m; ++k) {
            candidates.push_back(starts[k * (starts.size() - 1) / (m - 1)]);
        }
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }

    std::optional<PowerLawFit> best;
    for (std::size_t start : candidates) {
        const double f_th = sorted[start];
        const std::size_t n_tail = n - start;
        const auto above = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin() + static_cast<long>(start), sorted.end(), f_th));
        if (above < 2) {
            continue;
        }
        const double log_sum = suffix_log[start] - static_cast<double>(n_tail) * std::log(f_th);
        if (!(log_sum > 0.0)) {
            continue;
        }
        const double alpha = 1.0 + static_cast<double>(n_tail) / log_sum;
        const double d = ks_distance(std::span<const double>(sorted).subspan(start), alpha, f_th);
        if (!best || d < best->ks_distance) {
            best = PowerLawFit{alpha, f_th, d, n_tail};
        }
    }
    if (!best) {
        throw DomainError("every threshold candidate produced a degenerate tail");
    }
    return *best;
}

double power_law_quantile(double u, double alpha, double f_th) {
    require_normalizable(alpha, f_th);
    return f_th * std::pow(1.0 - u, -1.0 / (alpha - 1.0));
}

std::vector<double> sample_power_law(std::mt19937_64& rng, double alpha, double f_th, std::size_t n) {
    require_normalizable(alpha, f_th);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& f : out) {
        f = power_law_quantile(uniform(rng), alpha, f_th);
    }
    return out;
}

Histogram log_histogram(std::span<const double> values, int bins) {
    if (values.empty()) {
        throw DomainError("cannot histogram an empty sample");
    }
    if (bins < 1) {
        throw ConfigError("histogram needs at least one bin");
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(lo > 0.0)) {
        throw DomainError("logarithmic histogram needs positive values");
    }
    const double n = static_cast<double>(values.size());

    Histogram h;
    if (lo == hi) {
        h.edges = {lo, hi};
        h.centers = {lo};
        h.counts = {values.size()};
        h.density = {1.0};
        return h;
    }

    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / bins;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) {
        h.edges[i] = std::exp(log_lo + step * i);
    }
    h.edges.front() = lo;
    h.edges.back() = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        auto idx = static_cast<std::size_t>(std::upper_bound(h.edges.begin(), h.edges.end(), v) - h.edges.begin());
        idx = std::clamp<std::size_t>(idx, 1, static_cast<std::size_t>(bins)) - 1;
        ++h.counts[idx];
    }
    for (int i = 0; i < bins; ++i) {
        h.centers.push_back(std::sqrt(h.edges[i] * h.edges[i + 1]));
        h.density.push_back(static_cast<double>(h.counts[i]) / (n * (h.edges[i + 1] - h.edges[i])));
    }
    return h;
}

void write_histogram(std::ostream& out, const Histogram& h) {
    out << "# bin_center density\n";
    for (std::size_t i = 0; i < h.centers.size(); ++i) {
        out << format_double(h.centers[i]) << ' ' << format_double(h.density[i]) << '\n';
    }
}

namespace {

ExtremumDistribution describe(std::vector<double> values, int bins, const KsScanConfig& cfg) {
    ExtremumDistribution out;
    out.histogram = log_histogram(values, bins);
    try {
        out.fit = select_threshold_ks(values, cfg);
    } catch (const DomainError& e) {
        out.fit_error = e.what();
    }
    out.values = std::move(values);
    return out;
}

} // namespace

ExtremaPdfs window_extrema_pdfs(const windows::WindowSet& ws, int bins, const KsScanConfig& cfg) {
    if (ws.empty()) {
        throw DomainError("window extrema need a nonempty window set");
    }
    if (ws.normalized()) {
        throw DomainError("window extrema need raw (unnormalized) fluxes");
    }
    std::vector<double> minima;
    std::vector<double> maxima;
    minima.reserve(ws.size());
    maxima.reserve(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int t = 0; t < ws.w; ++t) {
            const double f = ws.feature(i, t, 0);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        minima.push_back(lo);
        maxima.push_back(hi);
    }
    return {describe(std::move(minima), bins, cfg), describe(std::move(maxima), bins, cfg)};
}

nlohmann::json to_json(const PowerLawFit& fit) {
    return {{"alpha", fit.alpha}, {"f_th", fit.f_th}, {"ks_distance", fit.ks_distance}, {"n_tail", fit.n_tail}};
}

namespace {

nlohmann::json distribution_json(const ExtremumDistribution& d) {
    nlohmann::json j = {{"samples", d.values.size()}};
    j["fit"] = d.fit ? to_json(*d.fit) : nlohmann::json(nullptr);
    if (!d.fit_error.empty()) {
        j["fit_error"] = d.fit_error;
    }
    nlohmann::json hist = nlohmann::json::array();
    for (std::size_t i = 0; i < d.histogram.centers.size(); ++i) {
        hist.push_back({{"center", d.histogram.centers[i]},
                        {"count", d.histogram.counts[i]},
                        {"density", d.histogram.density[i]}});
    }
    j["histogram"] = hist;
    return j;
}

} // namespace

nlohmann::json to_json(const ExtremaPdfs& pdfs) {
    return {{"window_minimum", distribution_json(pdfs.minimum)},
            {"window_maximum", distribution_json(pdfs.maximum)}};
}

} // namespace flarecast::socstats
