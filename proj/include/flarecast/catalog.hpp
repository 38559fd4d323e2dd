#pragma once

#include "flarecast/time.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace flarecast::catalog {

/// GOES soft X-ray class. The underlying value is the ordinal label.
enum class FlareClass : int { A = 1, B = 2, C = 3, M = 4, X = 5 };

inline constexpr double kClassAFloor = 1e-8;   // W m^-2
inline constexpr double kLargeFlareFlux = 1e-5; // M-class lower bound

inline int ordinal(FlareClass c) { return static_cast<int>(c); }
char letter(FlareClass c);
std::optional<FlareClass> class_from_letter(char c);
FlareClass class_from_ordinal(int ordinal);

/// Class whose half-open flux range contains peak_flux. Throws DomainError
/// below the A-class floor (1e-8 W m^-2) or for non-finite input.
FlareClass class_of_flux(double peak_flux);

inline bool is_large(FlareClass c) { return c == FlareClass::M || c == FlareClass::X; }

struct FlareEvent {
    std::string event_id;
    Instant start_time;
    Instant peak_time;
    Instant end_time;
    double peak_flux = 0.0;
    FlareClass flare_class = FlareClass::A;
    std::optional<double> background_flux;
    std::optional<double> total_flux;
    std::optional<std::string> multiple_id;

    bool operator==(const FlareEvent&) const = default;
};

/// Peak-time sorted events with unique ids.
class FlareCatalog {
public:
    FlareCatalog() = default;
    /// Sorts by peak time (stable). Throws DomainError on duplicate ids or
    /// events violating start <= peak <= end / positive flux.
    explicit FlareCatalog(std::vector<FlareEvent> events);

    const std::vector<FlareEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }
    Instant first_peak() const;
    Instant last_peak() const;

    bool operator==(const FlareCatalog&) const = default;

private:
    std::vector<FlareEvent> events_;
};

/// Column names of the delimiter-separated catalog format.
struct ColumnSchema {
    std::string event_id = "event_id";
    std::string start_time = "start_time";
    std::string peak_time = "peak_time";
    std::string end_time = "end_time";
    std::string peak_flux = "peak_flux";
    std::string flare_class = "class";
    std::string background_flux = "background_flux";
    std::string total_flux = "total_flux";
    std::string multiple_id = "multiple_id";
    char delimiter = ',';
};

struct Rejection {
    std::size_t line = 0; // 1-based, header is line 1
    std::string reason;
    std::string raw;
};

struct ParseResult {
    FlareCatalog catalog;
    std::vector<Rejection> rejections;
};

/// Reads a header row plus data rows. Rows that fail to parse or violate an
/// event invariant are quarantined in `rejections`. Throws SchemaError when a
/// required column is missing and EmptyCatalogError when no row survives.
ParseResult parse_catalog(std::istream& source, const ColumnSchema& schema = {});

/// Canonical re-emission: header with every column, one row per event,
/// ISO-8601 UTC times, shortest round-trip flux formatting.
void write_catalog(std::ostream& out, const FlareCatalog& catalog, const ColumnSchema& schema = {});

struct CatalogSummary {
    std::array<std::size_t, 5> class_counts{}; // indexed by ordinal - 1
    Instant span_begin;
    Instant span_end;
    std::size_t total_days = 0;     // calendar days in the inclusive span
    std::size_t zero_flare_days = 0;
    double mean_daily_count = 0.0;  // over every calendar day in the span
    std::size_t max_daily_count = 0;
    Day max_day;                    // earliest day reaching the max
    /// daily-count value -> number of days with that count (zero-count days included)
    std::map<std::size_t, std::size_t> daily_count_histogram;
};

/// Throws EmptyCatalogError on an empty catalog.
CatalogSummary summarize(const FlareCatalog& catalog);

nlohmann::json to_json(const CatalogSummary& summary);
nlohmann::json to_json(const std::vector<Rejection>& rejections);

} // namespace flarecast::catalog
