#include "flarecast/preprocess.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace flarecast::preprocess {

void SmoothingConfig::validate() const {
    if (n_bins < 1) {
        throw ConfigError("smoothing n_bins must be >= 1");
    }
    if (!(flux_min < flux_max)) {
        throw ConfigError("smoothing domain requires flux_min < flux_max");
    }
    if (spacing == BinSpacing::logarithmic && !(flux_min > 0.0)) {
        throw ConfigError("logarithmic smoothing requires flux_min > 0");
    }
}

std::vector<double> bin_edges(const SmoothingConfig& cfg) {
    cfg.validate();
    std::vector<double> edges(static_cast<std::size_t>(cfg.n_bins) + 1);
    const double n = cfg.n_bins;
    if (cfg.spacing == BinSpacing::linear) {
        const double width = (cfg.flux_max - cfg.flux_min) / n;
        for (int i = 0; i <= cfg.n_bins; ++i) {
            edges[i] = cfg.flux_min + width * i;
        }
    } else {
        const double lo = std::log(cfg.flux_min);
        const double width = (std::log(cfg.flux_max) - lo) / n;
        for (int i = 0; i <= cfg.n_bins; ++i) {
            edges[i] = std::exp(lo + width * i);
        }
    }
    edges.front() = cfg.flux_min;
    edges.back() = cfg.flux_max;
    return edges;
}

int bin_index(const SmoothingConfig& cfg, std::span<const double> edges, double flux) {
    if (!(flux >= cfg.flux_min && flux <= cfg.flux_max)) {
        throw DomainError("flux " + format_double(flux) + " outside smoothing domain [" +
                          format_double(cfg.flux_min) + ", " + format_double(cfg.flux_max) + "]");
    }
    // upper_bound gives the first edge strictly greater than flux
    const auto it = std::upper_bound(edges.begin(), edges.end(), flux);
    const auto idx = static_cast<int>(it - edges.begin()) - 1;
    return std::clamp(idx, 0, cfg.n_bins - 1);
}

std::vector<double> smooth_values(std::span<const double> values, const SmoothingConfig& cfg) {
    const auto edges = bin_edges(cfg);
    const auto nb = static_cast<std::size_t>(cfg.n_bins);
    std::vector<double> sum(nb, 0.0);
    std::vector<double> lo(nb, INFINITY);
    std::vector<double> hi(nb, -INFINITY);
    std::vector<std::size_t> count(nb, 0);
    std::vector<int> index(values.size());

    for (std::size_t i = 0; i < values.size(); ++i) {
        const int b = bin_index(cfg, edges, values[i]);
        index[i] = b;
        sum[b] += values[i];
        lo[b] = std::min(lo[b], values[i]);
        hi[b] = std::max(hi[b], values[i]);
        ++count[b];
    }

    std::vector<double> mean(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        if (count[b] == 0) {
            continue;
        }
        // a bin holding one distinct value keeps it bit-exactly (idempotence);
        // the clamp keeps a rounded mean inside the bin
        mean[b] = lo[b] == hi[b] ? lo[b] : std::clamp(sum[b] / static_cast<double>(count[b]), lo[b], hi[b]);
    }

    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = mean[index[i]];
    }
    return out;
}

FlareCatalog smooth_fluxes(const FlareCatalog& catalog, const SmoothingConfig& cfg) {
    cfg.validate();
    if (catalog.empty()) {
        return catalog;
    }
    std::vector<double> fluxes;
    fluxes.reserve(catalog.size());
    for (const auto& e : catalog.events()) {
        fluxes.push_back(e.peak_flux);
    }
    const auto smoothed = smooth_values(fluxes, cfg);
    std::vector<catalog::FlareEvent> events = catalog.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
        events[i].peak_flux = smoothed[i];
    }
    return FlareCatalog(std::move(events));
}

IrregularSeries build_irregular_series(const FlareCatalog& catalog) {
    IrregularSeries series;
    series.entries.reserve(catalog.size());
    const auto& events = catalog.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
        IrregularEntry entry;
        entry.peak_time = events[i].peak_time;
        entry.peak_flux = events[i].peak_flux;
        entry.flare_class = events[i].flare_class;
        entry.waiting_time =
            i == 0 ? 0.0 : static_cast<double>((events[i].peak_time - events[i - 1].peak_time).count());
        series.entries.push_back(entry);
    }
    return series;
}

MinMaxParams fit_minmax(std::span<const double> values, std::string feature) {
    if (values.empty()) {
        throw DomainError("cannot fit min-max scaling on an empty sequence");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {std::move(feature), *lo, *hi};
}

std::vector<double> apply_minmax(std::span<const double> values, const MinMaxParams& params) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return params.apply(v); });
    return out;
}

std::size_t RegularSeries::total_size() const {
    std::size_t n = 0;
    for (const auto& r : runs) {
        n += r.size();
    }
    return n;
}

std::size_t RegularSeries::active_days() const {
    return interval_hours > 0 ? total_size() / static_cast<std::size_t>(24 / interval_hours) : 0;
}

void RegularizeConfig::validate() const {
    if (interval_hours <= 0 || 24 % interval_hours != 0) {
        throw ConfigError("regularization interval must divide 24 hours, got " + std::to_string(interval_hours));
    }
    if (!(boundary_gap_hours > 0.0) || !(break_gap_hours > 0.0)) {
        throw ConfigError("gap thresholds must be positive");
    }
    if (!(floor_flux > 0.0)) {
        throw ConfigError("floor flux must be positive");
    }
}

RegularSeries regularize(const FlareCatalog& catalog, const RegularizeConfig& cfg) {
    cfg.validate();
    RegularSeries series;
    series.interval_hours = cfg.interval_hours;
    if (catalog.empty()) {
        return series;
    }

    using std::chrono::hours;
    using std::chrono::seconds;
    const std::size_t per_day = static_cast<std::size_t>(24 / cfg.interval_hours);
    const seconds step = hours(cfg.interval_hours);
    const auto& events = catalog.events();

    std::vector<Day> days;
    for (const auto& e : events) {
        const Day d = day_of(e.peak_time);
        if (days.empty() || days.back() != d) {
            days.push_back(d);
        }
    }

    const std::size_t n_slots = days.size() * per_day;
    auto slot_start = [&](std::size_t i) -> Instant {
        return Instant(days[i / per_day]) + step * static_cast<long>(i % per_day);
    };

    std::vector<double> flux(n_slots, cfg.floor_flux);
    std::vector<SlotFill> fill(n_slots, SlotFill::floor);
    std::vector<std::size_t> flare_slot(events.size());
    std::vector<Instant> peaks(events.size());

    std::size_t day_pos = 0;
    for (std::size_t j = 0; j < events.size(); ++j) {
        const auto& e = events[j];
        peaks[j] = e.peak_time;
        while (days[day_pos] != day_of(e.peak_time)) {
            ++day_pos;
        }
        const auto k = static_cast<std::size_t>((e.peak_time - Instant(days[day_pos])) / step);
        const std::size_t idx = day_pos * per_day + k;
        flare_slot[j] = idx;
        if (fill[idx] != SlotFill::observed || e.peak_flux > flux[idx]) {
            flux[idx] = e.peak_flux;
            fill[idx] = SlotFill::observed;
        }
    }

    auto gap_hours = [&](std::size_t prev, std::size_t next) {
        const auto gap = events[next].start_time - events[prev].end_time;
        return std::max(0.0, static_cast<double>(gap.count()) / 3600.0);
    };
    auto boundary_flux = [&](const catalog::FlareEvent& e) {
        return std::max(cfg.floor_flux, e.background_flux.value_or(cfg.floor_flux));
    };

    for (std::size_t i = 0; i < n_slots; ++i) {
        if (fill[i] == SlotFill::observed) {
            continue;
        }
        const Instant start = slot_start(i);
        const Instant end = start + step;
        const auto next = static_cast<std::size_t>(std::lower_bound(peaks.begin(), peaks.end(), end) - peaks.begin());
        if (next == 0 || next == events.size()) {
            continue; // before the first or after the last flare
        }
        const std::size_t prev = next - 1;
        if (gap_hours(prev, next) < cfg.boundary_gap_hours) {
            const auto to_prev = start - events[prev].end_time;
            const auto to_next = events[next].start_time - end;
            flux[i] = boundary_flux(to_prev <= to_next ? events[prev] : events[next]);
            fill[i] = SlotFill::boundary;
        }
    }

    std::vector<bool> break_before(n_slots, false);
    for (std::size_t i = 1; i < n_slots; ++i) {
        break_before[i] = slot_start(i) != slot_start(i - 1) + step;
    }
    for (std::size_t j = 0; j + 1 < events.size(); ++j) {
        if (gap_hours(j, j + 1) < cfg.break_gap_hours) {
            continue;
        }
        const std::size_t a = flare_slot[j];
        const std::size_t b = flare_slot[j + 1];
        bool already_split = false;
        for (std::size_t i = a + 1; i <= b && i < n_slots; ++i) {
            already_split = already_split || break_before[i];
        }
        if (!already_split && a + 1 < n_slots) {
            break_before[a + 1] = true;
        }
    }

    for (std::size_t i = 0; i < n_slots; ++i) {
        if (i == 0 || break_before[i]) {
            series.runs.push_back({slot_start(i), {}, {}});
        }
        series.runs.back().max_flux.push_back(flux[i]);
        series.runs.back().fill.push_back(fill[i]);
    }
    return series;
}

namespace {

const char* fill_name(SlotFill f) {
    switch (f) {
    case SlotFill::observed: return "observed";
    case SlotFill::boundary: return "boundary";
    case SlotFill::floor: return "floor";
    }
    return "floor";
}

SlotFill fill_from_name(std::string_view s) {
    if (s == "observed") return SlotFill::observed;
    if (s == "boundary") return SlotFill::boundary;
    if (s == "floor") return SlotFill::floor;
    throw DomainError("unknown slot fill '" + std::string(s) + "'");
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& what) {
    throw DomainError("line " + std::to_string(line_no) + ": " + what);
}

} // namespace

void write_irregular(std::ostream& out, const IrregularSeries& series) {
    out << "peak_time,peak_flux,waiting_time,class\n";
    for (const auto& e : series.entries) {
        out << format_iso8601(e.peak_time) << ',' << format_double(e.peak_flux) << ','
            << format_double(e.waiting_time) << ',' << catalog::letter(e.flare_class) << '\n';
    }
}

IrregularSeries read_irregular(std::istream& in) {
    IrregularSeries series;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || trim(line).empty()) {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 4) {
            bad_line(line_no, "expected 4 fields");
        }
        const auto t = parse_iso8601(f[0]);
        const auto flux = parse_double(f[1]);
        const auto wait = parse_double(f[2]);
        const auto cls = trim(f[3]).empty() ? std::nullopt : catalog::class_from_letter(trim(f[3]).front());
        if (!t || !flux || !wait || !cls) {
            bad_line(line_no, "malformed irregular series row");
        }
        series.entries.push_back({*t, *flux, *wait, *cls});
    }
    return series;
}

void write_regular(std::ostream& out, const RegularSeries& series) {
    out << "# interval_hours=" << series.interval_hours << '\n';
    out << "run,interval_start,flux,fill\n";
    const std::chrono::seconds step = std::chrono::hours(series.interval_hours);
    for (std::size_t r = 0; r < series.runs.size(); ++r) {
        const auto& run = series.runs[r];
        for (std::size_t i = 0; i < run.size(); ++i) {
            out << r << ',' << format_iso8601(run.start + step * static_cast<long>(i)) << ','
                << format_double(run.max_flux[i]) << ',' << fill_name(run.fill[i]) << '\n';
        }
    }
}

RegularSeries read_regular(std::istream& in) {
    RegularSeries series;
    std::string line;
    std::size_t line_no = 0;
    long current_run = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.front() == '#') {
            const auto pos = t.find("interval_hours=");
            if (pos != std::string_view::npos) {
                const auto v = parse_double(t.substr(pos + 15));
                if (!v) {
                    bad_line(line_no, "bad interval_hours");
                }
                series.interval_hours = static_cast<int>(*v);
            }
            continue;
        }
        if (t.rfind("run,", 0) == 0) {
            continue;
        }
        const auto f = split(t, ',');
        if (f.size() != 4) {
            bad_line(line_no, "expected 4 fields");
        }
        const auto run = parse_double(f[0]);
        const auto start = parse_iso8601(f[1]);
        const auto flux = parse_double(f[2]);
        if (!run || !start || !flux) {
            bad_line(line_no, "malformed regular series row");
        }
        if (static_cast<long>(*run) != current_run) {
            current_run = static_cast<long>(*run);
            series.runs.push_back({*start, {}, {}});
        }
        series.runs.back().max_flux.push_back(*flux);
        series.runs.back().fill.push_back(fill_from_name(trim(f[3])));
    }
    return series;
}

} // namespace flarecast::preprocess
