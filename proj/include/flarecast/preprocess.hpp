#pragma once

#include "flarecast/catalog.hpp"
#include "flarecast/time.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace flarecast::preprocess {

using catalog::FlareCatalog;
using catalog::FlareClass;

/// Catalog minimum flux, used as the GOES background floor when filling gaps.
inline constexpr double kFloorFlux = 2.071e-8;
inline constexpr double kCatalogMaxFlux = 2.628e-3;

enum class BinSpacing { linear, logarithmic };

struct SmoothingConfig {
    int n_bins = 500;
    BinSpacing spacing = BinSpacing::logarithmic;
    double flux_min = kFloorFlux;
    double flux_max = kCatalogMaxFlux;

    /// Throws ConfigError when an invariant does not hold.
    void validate() const;
};

/// n_bins + 1 edges; the first and last equal flux_min and flux_max exactly.
std::vector<double> bin_edges(const SmoothingConfig& cfg);

/// Bin holding `flux`: edges[i] <= flux < edges[i+1], the last bin closed above.
/// Throws DomainError outside [flux_min, flux_max].
int bin_index(const SmoothingConfig& cfg, std::span<const double> edges, double flux);

/// Replaces every value by the mean of all values sharing its bin.
std::vector<double> smooth_values(std::span<const double> values, const SmoothingConfig& cfg);

/// Peak fluxes replaced by their bin means. Class labels are kept as ingested.
FlareCatalog smooth_fluxes(const FlareCatalog& catalog, const SmoothingConfig& cfg);

struct IrregularEntry {
    Instant peak_time;
    double peak_flux = 0.0;
    double waiting_time = 0.0; // seconds since the previous peak
    FlareClass flare_class = FlareClass::A;
};

struct IrregularSeries {
    std::vector<IrregularEntry> entries;

    std::size_t size() const { return entries.size(); }
};

/// One entry per event; waiting times are peak-to-peak, the first is 0.
IrregularSeries build_irregular_series(const FlareCatalog& catalog);

struct MinMaxParams {
    std::string feature;
    double observed_min = 0.0;
    double observed_max = 0.0;

    double apply(double v) const {
        const double range = observed_max - observed_min;
        return range > 0.0 ? (v - observed_min) / range : 0.0;
    }
};

/// Throws DomainError on an empty sequence.
MinMaxParams fit_minmax(std::span<const double> values, std::string feature = {});
std::vector<double> apply_minmax(std::span<const double> values, const MinMaxParams& params);

enum class SlotFill { observed, boundary, floor };

/// Contiguous stretch of fixed-interval slots.
struct RegularRun {
    Instant start;
    std::vector<double> max_flux;
    std::vector<SlotFill> fill;

    std::size_t size() const { return max_flux.size(); }
};

struct RegularSeries {
    std::vector<RegularRun> runs;
    int interval_hours = 3;

    std::size_t total_size() const;
    std::size_t active_days() const;
};

struct RegularizeConfig {
    int interval_hours = 3;
    double boundary_gap_hours = 3.0; // flare-free gaps shorter than this take boundary flux
    double break_gap_hours = 21.0;   // gaps at least this long split the series
    double floor_flux = kFloorFlux;

    /// Throws ConfigError unless the interval divides 24 h and the gap
    /// thresholds and floor are positive.
    void validate() const;
};

/// Drops flare-free UTC days, tiles the rest into fixed slots holding the
/// maximum peak flux, fills empty slots, and splits runs at long gaps.
/// Throws ConfigError if the interval does not divide 24.
RegularSeries regularize(const FlareCatalog& catalog, const RegularizeConfig& cfg = {});

/// Columnar text: "peak_time,peak_flux,waiting_time,class".
void write_irregular(std::ostream& out, const IrregularSeries& series);
IrregularSeries read_irregular(std::istream& in);

/// Columnar text: "run,interval_start,flux,fill" preceded by "# interval_hours=<h>".
void write_regular(std::ostream& out, const RegularSeries& series);
RegularSeries read_regular(std::istream& in);

} // namespace flarecast::preprocess
