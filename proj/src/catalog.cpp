#include "flarecast/catalog.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace flarecast::catalog {

char letter(FlareClass c) {
    static constexpr char kLetters[] = {'A', 'B', 'C', 'M', 'X'};
    return kLetters[ordinal(c) - 1];
}

std::optional<FlareClass> class_from_letter(char c) {
    switch (c) {
    case 'A': case 'a': return FlareClass::A;
    case 'B': case 'b': return FlareClass::B;
    case 'C': case 'c': return FlareClass::C;
    case 'M': case 'm': return FlareClass::M;
    case 'X': case 'x': return FlareClass::X;
    default: return std::nullopt;
    }
}

FlareClass class_from_ordinal(int ordinal) {
    if (ordinal < 1 || ordinal > 5) {
        throw DomainError("flare class ordinal out of range: " + std::to_string(ordinal));
    }
    return static_cast<FlareClass>(ordinal);
}

FlareClass class_of_flux(double peak_flux) {
    if (!std::isfinite(peak_flux) || peak_flux < kClassAFloor) {
        throw DomainError("flux " + format_double(peak_flux) + " W m^-2 is below the A-class range");
    }
    if (peak_flux < 1e-7) return FlareClass::A;
    if (peak_flux < 1e-6) return FlareClass::B;
    if (peak_flux < 1e-5) return FlareClass::C;
    if (peak_flux < 1e-4) return FlareClass::M;
    return FlareClass::X;
}

namespace {

std::optional<std::string> event_violation(const FlareEvent& e) {
    if (e.event_id.empty()) {
        return "empty event_id";
    }
    if (!(e.start_time <= e.peak_time && e.peak_time <= e.end_time)) {
        return "times not ordered start <= peak <= end";
    }
    if (!(e.peak_flux > 0.0) || !std::isfinite(e.peak_flux)) {
        return "peak_flux must be positive";
    }
    return std::nullopt;
}

} // namespace

FlareCatalog::FlareCatalog(std::vector<FlareEvent> events) : events_(std::move(events)) {
    std::unordered_set<std::string> ids;
    for (const auto& e : events_) {
        if (auto why = event_violation(e)) {
            throw DomainError("event " + e.event_id + ": " + *why);
        }
        if (!ids.insert(e.event_id).second) {
            throw DomainError("duplicate event_id " + e.event_id);
        }
    }
    std::stable_sort(events_.begin(), events_.end(),
                     [](const FlareEvent& a, const FlareEvent& b) { return a.peak_time < b.peak_time; });
}

Instant FlareCatalog::first_peak() const {
    if (events_.empty()) {
        throw EmptyCatalogError("catalog is empty");
    }
    return events_.front().peak_time;
}

Instant FlareCatalog::last_peak() const {
    if (events_.empty()) {
        throw EmptyCatalogError("catalog is empty");
    }
    return events_.back().peak_time;
}

ParseResult parse_catalog(std::istream& source, const ColumnSchema& schema) {
    std::string line;
    if (!std::getline(source, line)) {
        throw EmptyCatalogError("catalog has no header row");
    }

    const auto header = split(line, schema.delimiter);
    auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) {
                return i;
            }
        }
        return std::nullopt;
    };
    auto require = [&](const std::string& name) {
        auto idx = find_column(name);
        if (!idx) {
            throw SchemaError(name, "catalog is missing required column '" + name + "'");
        }
        return *idx;
    };

    const std::size_t c_id = require(schema.event_id);
    const std::size_t c_start = require(schema.start_time);
    const std::size_t c_end = require(schema.end_time);
    const std::size_t c_peak = require(schema.peak_time);
    const std::size_t c_flux = require(schema.peak_flux);
    const std::size_t c_class = require(schema.flare_class);
    const auto c_bg = find_column(schema.background_flux);
    const auto c_total = find_column(schema.total_flux);
    const auto c_multi = find_column(schema.multiple_id);

    ParseResult result;
    std::vector<FlareEvent> events;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 1;

    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto reject = [&](std::string reason) {
            result.rejections.push_back({line_no, std::move(reason), line});
        };

        const auto fields = split(line, schema.delimiter);
        if (fields.size() != header.size()) {
            reject("expected " + std::to_string(header.size()) + " fields, found " +
                   std::to_string(fields.size()));
            continue;
        }

        FlareEvent e;
        e.event_id = std::string(trim(fields[c_id]));

        const auto start = parse_iso8601(fields[c_start]);
        const auto peak = parse_iso8601(fields[c_peak]);
        const auto end = parse_iso8601(fields[c_end]);
        if (!start || !peak || !end) {
            reject("unparseable time");
            continue;
        }
        e.start_time = *start;
        e.peak_time = *peak;
        e.end_time = *end;

        const auto flux = parse_double(fields[c_flux]);
        if (!flux) {
            reject("unparseable peak_flux");
            continue;
        }
        e.peak_flux = *flux;

        const auto class_text = trim(fields[c_class]);
        const auto cls = class_text.empty() ? std::nullopt : class_from_letter(class_text.front());
        if (!cls) {
            reject("unparseable class '" + std::string(class_text) + "'");
            continue;
        }
        e.flare_class = *cls;

        auto optional_double = [&](std::optional<std::size_t> col, std::optional<double>& out) {
            if (!col || trim(fields[*col]).empty()) {
                return true;
            }
            out = parse_double(fields[*col]);
            return out.has_value();
        };
        if (!optional_double(c_bg, e.background_flux)) {
            reject("unparseable background_flux");
            continue;
        }
        if (!optional_double(c_total, e.total_flux)) {
            reject("unparseable total_flux");
            continue;
        }
        if (c_multi && !trim(fields[*c_multi]).empty()) {
            e.multiple_id = std::string(trim(fields[*c_multi]));
        }

        if (auto why = event_violation(e)) {
            reject(*why);
            continue;
        }
        if (e.peak_flux < kClassAFloor) {
            reject("peak_flux below the A-class range");
            continue;
        }
        if (class_of_flux(e.peak_flux) != e.flare_class) {
            reject(std::string("class ") + letter(e.flare_class) + " inconsistent with peak_flux " +
                   format_double(e.peak_flux));
            continue;
        }
        if (!ids.insert(e.event_id).second) {
            reject("duplicate event_id " + e.event_id);
            continue;
        }
        events.push_back(std::move(e));
    }

    if (events.empty()) {
        throw EmptyCatalogError("catalog contains no valid rows");
    }
    result.catalog = FlareCatalog(std::move(events));
    return result;
}

void write_catalog(std::ostream& out, const FlareCatalog& catalog, const ColumnSchema& schema) {
    const char d = schema.delimiter;
    out << schema.event_id << d << schema.start_time << d << schema.peak_time << d << schema.end_time << d
        << schema.peak_flux << d << schema.flare_class << d << schema.background_flux << d
        << schema.total_flux << d << schema.multiple_id << '\n';
    for (const auto& e : catalog.events()) {
        out << e.event_id << d << format_iso8601(e.start_time) << d << format_iso8601(e.peak_time) << d
            << format_iso8601(e.end_time) << d << format_double(e.peak_flux) << d << letter(e.flare_class)
            << d << (e.background_flux ? format_double(*e.background_flux) : "") << d
            << (e.total_flux ? format_double(*e.total_flux) : "") << d << e.multiple_id.value_or("")
            << '\n';
    }
}

CatalogSummary summarize(const FlareCatalog& catalog) {
    if (catalog.empty()) {
        throw EmptyCatalogError("cannot summarize an empty catalog");
    }
    CatalogSummary s;
    s.span_begin = catalog.first_peak();
    s.span_end = catalog.last_peak();

    const Day first = day_of(s.span_begin);
    const Day last = day_of(s.span_end);
    s.total_days = static_cast<std::size_t>((last - first).count()) + 1;

    std::vector<std::size_t> per_day(s.total_days, 0);
    for (const auto& e : catalog.events()) {
        ++s.class_counts[ordinal(e.flare_class) - 1];
        ++per_day[static_cast<std::size_t>((day_of(e.peak_time) - first).count())];
    }

    std::size_t best = 0;
    for (std::size_t i = 0; i < per_day.size(); ++i) {
        ++s.daily_count_histogram[per_day[i]];
        if (per_day[i] == 0) {
            ++s.zero_flare_days;
        }
        if (per_day[i] > per_day[best]) {
            best = i;
        }
    }
    s.max_daily_count = per_day[best];
    s.max_day = first + std::chrono::days(static_cast<long>(best));
    s.mean_daily_count = static_cast<double>(catalog.size()) / static_cast<double>(s.total_days);
    return s;
}

nlohmann::json to_json(const CatalogSummary& s) {
    nlohmann::json counts;
    for (int k = 1; k <= 5; ++k) {
        counts[std::string(1, letter(class_from_ordinal(k)))] = s.class_counts[k - 1];
    }
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [count, days] : s.daily_count_histogram) {
        hist.push_back({{"flares_per_day", count}, {"days", days}});
    }
    return {
        {"class_counts", counts},
        {"span", {format_iso8601(s.span_begin), format_iso8601(s.span_end)}},
        {"total_days", s.total_days},
        {"zero_flare_days", s.zero_flare_days},
        {"mean_daily_count", s.mean_daily_count},
        {"max_daily_count", s.max_daily_count},
        {"max_day", format_date(s.max_day)},
        {"daily_count_histogram", hist},
    };
}

nlohmann::json to_json(const std::vector<Rejection>& rejections) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rejections) {
        out.push_back({{"line", r.line}, {"reason", r.reason}, {"raw", r.raw}});
    }
    return out;
}

} // namespace flarecast::catalog
