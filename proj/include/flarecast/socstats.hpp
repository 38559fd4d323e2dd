#pragma once

#include "flarecast/windows.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace flarecast::socstats {

/// Continuous power law p(f) = ((alpha - 1) / f_th) (f / f_th)^-alpha, f >= f_th.
struct PowerLawFit {
    double alpha = 0.0;
    double f_th = 0.0;
    double ks_distance = 0.0;
    std::size_t n_tail = 0;
};

/// Throws DomainError for alpha <= 1 (not normalizable) or f < f_th.
double power_law_pdf(double f, double alpha, double f_th);
double power_law_cdf(double f, double alpha, double f_th);

/// alpha = 1 + n / sum ln(f_i / f_th) over samples f_i >= f_th. Throws
/// DomainError with fewer than two samples strictly above f_th.
double fit_alpha_mle(std::span<const double> samples, double f_th);

/// Sup-norm gap between the empirical CDF of an ascending tail and the model CDF.
double ks_distance(std::span<const double> sorted_tail, double alpha, double f_th);

struct KsScanConfig {
    std::size_t max_candidates = 200;
    std::size_t min_tail = 50;
    std::size_t min_samples = 50;
};

/// Scans candidate thresholds over the unique sample values (evenly
/// subsampled), fitting alpha by MLE on each tail and keeping the smallest KS
/// distance; ties go to the lower threshold. Throws DomainError on too few
/// samples or when no candidate leaves min_tail samples.
PowerLawFit select_threshold_ks(std::span<const double> samples, const KsScanConfig& cfg = {});

/// Inverse-CDF draw: f_th (1 - u)^(-1 / (alpha - 1)).
double power_law_quantile(double u, double alpha, double f_th);
std::vector<double> sample_power_law(std::mt19937_64& rng, double alpha, double f_th, std::size_t n);

/// Logarithmically spaced bins; density = count / (n * linear bin width).
/// A zero-width range yields one bin whose density is its probability mass.
struct Histogram {
    std::vector<double> edges;
    std::vector<double> centers; // geometric bin centres
    std::vector<std::size_t> counts;
    std::vector<double> density;
};

Histogram log_histogram(std::span<const double> values, int bins);
void write_histogram(std::ostream& out, const Histogram& h);

struct ExtremumDistribution {
    std::vector<double> values;
    Histogram histogram;
    std::optional<PowerLawFit> fit;
    std::string fit_error; // set when fitting failed
};

struct ExtremaPdfs {
    ExtremumDistribution minimum;
    ExtremumDistribution maximum;
};

/// Per-window min and max of the raw peak flux (feature 0), their log-binned
/// PDFs and KS-selected power-law fits. Throws DomainError on an empty or
/// normalized window set.
ExtremaPdfs window_extrema_pdfs(const windows::WindowSet& ws, int bins = 40, const KsScanConfig& cfg = {});

nlohmann::json to_json(const PowerLawFit& fit);
nlohmann::json to_json(const ExtremaPdfs& pdfs);

} // namespace flarecast::socstats
