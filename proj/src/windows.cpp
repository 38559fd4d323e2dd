#include "flarecast/windows.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

namespace flarecast::windows {

using catalog::FlareClass;

const char* to_string(SeriesMode mode) {
    return mode == SeriesMode::irregular ? "irregular" : "regular";
}

SeriesMode series_mode_from_string(std::string_view s) {
    if (s == "irregular") return SeriesMode::irregular;
    if (s == "regular") return SeriesMode::regular;
    throw ConfigError("unknown series mode '" + std::string(s) + "'");
}

WindowSet build_windows(const preprocess::IrregularSeries& series, int w) {
    if (w < 1) {
        throw ConfigError("window length must be >= 1");
    }
    WindowSet ws;
    ws.w = w;
    ws.d = 2;
    ws.mode = SeriesMode::irregular;
    ws.provenance = "irregular";
    const auto& e = series.entries;
    const auto wl = static_cast<std::size_t>(w);
    if (e.size() <= wl) {
        return ws;
    }
    ws.windows.reserve(e.size() - wl);
    for (std::size_t i = 0; i + wl < e.size(); ++i) {
        Window win;
        win.features.resize(wl * 2);
        for (std::size_t t = 0; t < wl; ++t) {
            win.features[2 * t] = e[i + t].peak_flux;
            win.features[2 * t + 1] = e[i + t].waiting_time;
        }
        const auto& next = e[i + wl];
        win.class_label = catalog::ordinal(next.flare_class);
        win.large = catalog::is_large(next.flare_class);
        win.anchor_index = i + wl;
        win.anchor_time = next.peak_time;
        ws.windows.push_back(std::move(win));
    }
    return ws;
}

WindowSet build_windows(const preprocess::RegularSeries& series, int w) {
    if (w < 1) {
        throw ConfigError("window length must be >= 1");
    }
    WindowSet ws;
    ws.w = w;
    ws.d = 1;
    ws.mode = SeriesMode::regular;
    ws.provenance = "regular/" + std::to_string(series.interval_hours) + "h";
    const auto wl = static_cast<std::size_t>(w);
    const std::chrono::seconds step = std::chrono::hours(series.interval_hours);
    std::size_t offset = 0;
    for (const auto& run : series.runs) {
        for (std::size_t i = 0; i + wl < run.size(); ++i) {
            Window win;
            win.features.assign(run.max_flux.begin() + static_cast<long>(i),
                                run.max_flux.begin() + static_cast<long>(i + wl));
            const auto cls = catalog::class_of_flux(run.max_flux[i + wl]);
            win.class_label = catalog::ordinal(cls);
            win.large = catalog::is_large(cls);
            win.anchor_index = offset + i + wl;
            win.anchor_time = run.start + step * static_cast<long>(i + wl);
            ws.windows.push_back(std::move(win));
        }
        offset += run.size();
    }
    return ws;
}

std::vector<preprocess::MinMaxParams> fit_normalization(const WindowSet& ws) {
    if (ws.empty()) {
        throw DomainError("cannot fit normalization on an empty window set");
    }
    if (ws.normalized()) {
        throw DomainError("window set is already normalized");
    }
    static const char* kIrregularNames[] = {"peak_flux", "waiting_time"};
    std::vector<preprocess::MinMaxParams> params;
    for (int f = 0; f < ws.d; ++f) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& win : ws.windows) {
            for (int t = 0; t < ws.w; ++t) {
                const double v = win.features[static_cast<std::size_t>(t) * ws.d + f];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        std::string name = ws.mode == SeriesMode::irregular && f < 2 ? kIrregularNames[f] : "max_flux";
        params.push_back({std::move(name), lo, hi});
    }
    return params;
}

WindowSet apply_normalization(const WindowSet& ws, const std::vector<preprocess::MinMaxParams>& params) {
    if (ws.normalized()) {
        throw DomainError("window set is already normalized");
    }
    if (params.size() != static_cast<std::size_t>(ws.d)) {
        throw DomainError("normalization parameter count does not match feature width");
    }
    WindowSet out = ws;
    for (auto& win : out.windows) {
        for (std::size_t i = 0; i < win.features.size(); ++i) {
            win.features[i] = params[i % static_cast<std::size_t>(ws.d)].apply(win.features[i]);
        }
    }
    out.normalization = params;
    return out;
}

double BinaryCounts::ratio() const {
    return large == 0 ? std::numeric_limits<double>::infinity()
                      : static_cast<double>(small) / static_cast<double>(large);
}

BinaryCounts partition_binary(const WindowSet& ws) {
    BinaryCounts c;
    for (const auto& win : ws.windows) {
        (win.large ? c.large : c.small)++;
    }
    return c;
}

WindowSet oversample_minority(const WindowSet& train, const ResampleConfig& cfg, std::uint64_t seed) {
    if (cfg.R < 0) {
        throw ConfigError("resampling factor R must be >= 0");
    }
    const auto counts = partition_binary(train);
    if (cfg.R == 0 || counts.large == 0) {
        return train;
    }
    WindowSet out = train;
    out.windows.reserve(train.size() + counts.large * static_cast<std::size_t>(cfg.R));
    for (const auto& win : train.windows) {
        if (win.large) {
            for (int r = 0; r < cfg.R; ++r) {
                out.windows.push_back(win);
            }
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(out.windows.begin(), out.windows.end(), rng);
    return out;
}

WindowSet slice(const WindowSet& ws, std::size_t begin, std::size_t end) {
    end = std::min(end, ws.size());
    begin = std::min(begin, end);
    WindowSet out = ws;
    out.windows.assign(ws.windows.begin() + static_cast<long>(begin), ws.windows.begin() + static_cast<long>(end));
    return out;
}

WindowSet select(const WindowSet& ws, std::span<const std::size_t> indices) {
    WindowSet out = ws;
    out.windows.clear();
    out.windows.reserve(indices.size());
    for (auto i : indices) {
        out.windows.push_back(ws.windows.at(i));
    }
    return out;
}

std::pair<WindowSet, WindowSet> chronological_split(const WindowSet& ws, double train_fraction,
                                                    std::size_t purge) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
        throw ConfigError("train_fraction must lie in [0, 1]");
    }
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ws.size())));
    const std::size_t kept = n_train > purge ? n_train - purge : 0;
    return {slice(ws, 0, kept), slice(ws, n_train, ws.size())};
}

FoldPlan walk_forward_folds(std::size_t n, int k) {
    if (k < 2) {
        throw DomainError("walk-forward validation needs k >= 2");
    }
    const auto chunks = static_cast<std::size_t>(k) + 1;
    if (n < chunks) {
        throw DomainError("walk-forward validation with k=" + std::to_string(k) + " needs at least " +
                          std::to_string(chunks) + " windows, got " + std::to_string(n));
    }
    auto boundary = [&](std::size_t j) { return j * n / chunks; };
    FoldPlan plan;
    plan.k = k;
    for (std::size_t j = 1; j <= static_cast<std::size_t>(k); ++j) {
        plan.folds.push_back({0, boundary(j), boundary(j), boundary(j + 1)});
    }
    return plan;
}

void write_windows(std::ostream& out, const WindowSet& ws) {
    out << "# windowset w=" << ws.w << " d=" << ws.d << " mode=" << to_string(ws.mode)
        << " provenance=" << ws.provenance << '\n';
    for (const auto& p : ws.normalization) {
        out << "# minmax " << p.feature << ' ' << format_double(p.observed_min) << ' '
            << format_double(p.observed_max) << '\n';
    }
    for (const auto& win : ws.windows) {
        out << win.anchor_index << ',' << format_iso8601(win.anchor_time) << ',' << win.class_label;
        for (double v : win.features) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

WindowSet read_windows(std::istream& in) {
    WindowSet ws;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    auto fail = [&](const std::string& what) {
        throw DomainError("window file line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.rfind("# windowset", 0) == 0) {
            for (auto tok : split(t, ' ')) {
                const auto eq = tok.find('=');
                if (eq == std::string_view::npos) {
                    continue;
                }
                const auto key = tok.substr(0, eq);
                const auto value = tok.substr(eq + 1);
                if (key == "w") ws.w = static_cast<int>(parse_double(value).value_or(-1));
                if (key == "d") ws.d = static_cast<int>(parse_double(value).value_or(-1));
                if (key == "mode") ws.mode = series_mode_from_string(value);
                if (key == "provenance") ws.provenance = std::string(value);
            }
            if (ws.w < 1 || ws.d < 1) {
                fail("bad window shape in header");
            }
            have_header = true;
            continue;
        }
        if (t.rfind("# minmax", 0) == 0) {
            const auto tok = split(t, ' ');
            if (tok.size() != 5) {
                fail("bad minmax line");
            }
            const auto lo = parse_double(tok[3]);
            const auto hi = parse_double(tok[4]);
            if (!lo || !hi) {
                fail("bad minmax values");
            }
            ws.normalization.push_back({std::string(tok[2]), *lo, *hi});
            continue;
        }
        if (t.front() == '#') {
            continue;
        }
        if (!have_header) {
            fail("missing '# windowset' header");
        }
        const auto f = split(t, ',');
        const auto expected = 3 + static_cast<std::size_t>(ws.w) * static_cast<std::size_t>(ws.d);
        if (f.size() != expected) {
            fail("expected " + std::to_string(expected) + " fields");
        }
        Window win;
        const auto idx = parse_double(f[0]);
        const auto time = parse_iso8601(f[1]);
        const auto cls = parse_double(f[2]);
        if (!idx || !time || !cls || *cls < 1 || *cls > 5) {
            fail("malformed window record");
        }
        win.anchor_index = static_cast<std::size_t>(*idx);
        win.anchor_time = *time;
        win.class_label = static_cast<int>(*cls);
        win.large = catalog::is_large(catalog::class_from_ordinal(win.class_label));
        win.features.reserve(expected - 3);
        for (std::size_t i = 3; i < f.size(); ++i) {
            const auto v = parse_double(f[i]);
            if (!v) {
                fail("malformed feature value");
            }
            win.features.push_back(*v);
        }
        ws.windows.push_back(std::move(win));
    }
    if (!have_header) {
        throw DomainError("window file has no '# windowset' header");
    }
    return ws;
}

} // namespace flarecast::windows
