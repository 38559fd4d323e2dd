#pragma once

#include "flarecast/preprocess.hpp"
#include "flarecast/time.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace flarecast::windows {

enum class SeriesMode { irregular, regular };

const char* to_string(SeriesMode mode);
SeriesMode series_mode_from_string(std::string_view s);

inline constexpr int kDefaultWindowLength = 24;

struct Window {
    /// w rows (time) by d columns (features), row-major.
    std::vector<double> features;
    int class_label = 1; // ordinal 1..5 of the predicted element
    bool large = false;  // class_label in {M, X}
    std::size_t anchor_index = 0; // position of the predicted element in the source series
    Instant anchor_time;
};

struct WindowSet {
    std::vector<Window> windows;
    int w = kDefaultWindowLength;
    int d = 1;
    SeriesMode mode = SeriesMode::regular;
    std::string provenance;
    /// Per-feature scaling applied to `features`; empty while values are raw.
    std::vector<preprocess::MinMaxParams> normalization;

    std::size_t size() const { return windows.size(); }
    bool empty() const { return windows.empty(); }
    bool normalized() const { return !normalization.empty(); }
    double feature(std::size_t window, int t, int f) const {
        return windows[window].features[static_cast<std::size_t>(t) * d + f];
    }
};

/// Irregular mode: d = 2 (peak flux, waiting time); window i covers entries
/// i..i+w-1 and is labelled by entry i+w. Series shorter than w+1 yield no windows.
WindowSet build_windows(const preprocess::IrregularSeries& series, int w = kDefaultWindowLength);

/// Regular mode: d = 1 (max flux); windows stay inside a run and are labelled
/// by the class of the next slot's flux.
WindowSet build_windows(const preprocess::RegularSeries& series, int w = kDefaultWindowLength);

/// Min-max parameters per feature column, fitted over every value in `ws`.
std::vector<preprocess::MinMaxParams> fit_normalization(const WindowSet& ws);
/// Throws DomainError if `ws` is already normalized or the parameter count differs from d.
WindowSet apply_normalization(const WindowSet& ws, const std::vector<preprocess::MinMaxParams>& params);

struct BinaryCounts {
    std::size_t small = 0;
    std::size_t large = 0;
    /// small / large; infinity when there are no large windows.
    double ratio() const;
};

BinaryCounts partition_binary(const WindowSet& ws);

struct ResampleConfig {
    int R = 0; // additional copies of each large window
};

/// Appends R copies of every large window, then shuffles with `seed`.
/// R == 0 or a set without large windows is returned unchanged.
WindowSet oversample_minority(const WindowSet& train, const ResampleConfig& cfg, std::uint64_t seed);

/// Windows [begin, end) in order.
WindowSet slice(const WindowSet& ws, std::size_t begin, std::size_t end);
WindowSet select(const WindowSet& ws, std::span<const std::size_t> indices);

/// First floor(fraction * n) windows train, the rest test. `purge` drops that
/// many windows from the end of the train partition.
std::pair<WindowSet, WindowSet> chronological_split(const WindowSet& ws, double train_fraction = 0.8,
                                                    std::size_t purge = 0);

struct Fold {
    std::size_t train_begin = 0;
    std::size_t train_end = 0; // exclusive
    std::size_t test_begin = 0;
    std::size_t test_end = 0;  // exclusive
};

struct FoldPlan {
    int k = 4;
    std::vector<Fold> folds;
};

/// Expanding-window plan: n is cut into k + 1 equal chunks; fold j trains on
/// chunks 1..j and tests on chunk j+1. Throws DomainError if n < k + 1 or k < 2.
FoldPlan walk_forward_folds(std::size_t n, int k = 4);

/// One window per line: anchor_index,anchor_time,class_label,f_0..f_{w*d-1}.
void write_windows(std::ostream& out, const WindowSet& ws);
WindowSet read_windows(std::istream& in);

} // namespace flarecast::windows
