#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace flarecast::evaluation {

/// Positive class = large flares (M, X); negative = small (A, B, C).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t positives() const { return tp + fn; }
    std::size_t negatives() const { return fp + tn; }
    std::size_t total() const { return tp + fp + tn + fn; }

    bool operator==(const ConfusionMatrix&) const = default;
};

/// p >= threshold counts as a positive prediction. Labels are 0/1.
/// Throws DomainError on empty or mismatched input.
ConfusionMatrix confusion(std::span<const int> labels, std::span<const double> probabilities,
                          double threshold = 0.5);

/// Undefined (0/0) metrics are nullopt, never zero.
using Metric = std::optional<double>;

enum class MetricId : std::size_t {
    accuracy,
    tss,
    precision_small,
    recall_small,
    precision_large,
    recall_large,
    specificity,
    apss,
    hss,
    auc,
};
inline constexpr std::size_t kMetricCount = 10;
const char* metric_name(MetricId id);

struct MetricBundle {
    std::array<Metric, kMetricCount> values{};

    Metric& operator[](MetricId id) { return values[static_cast<std::size_t>(id)]; }
    const Metric& operator[](MetricId id) const { return values[static_cast<std::size_t>(id)]; }
};

/// Accuracy, per-class precision/recall, specificity, ApSS (piecewise on
/// P < Neg), HSS and TSS. AUC is left unset.
MetricBundle skill_scores(const ConfusionMatrix& cm);

/// HSS of a classifier that is 75% right on both classes, as a function of
/// the class ratio r = P / Neg: 4r / ((r + 3)^2 - 8). Throws DomainError for r <= 0.
double hss_imbalance_curve(double r);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0; // +inf for the (0, 0) endpoint
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// One point per distinct score (tied scores move together) plus (0,0) and
/// (1,1); AUC by the trapezoidal rule. Throws DomainError unless both classes occur.
RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores);

void write_roc(std::ostream& out, const RocCurve& roc);

struct MetricSummary {
    Metric mean;
    Metric std; // population standard deviation
    std::vector<std::size_t> undefined_runs;
};

struct SkillReport {
    std::array<MetricSummary, kMetricCount> metrics{};
    std::size_t runs = 0;

    const MetricSummary& operator[](MetricId id) const { return metrics[static_cast<std::size_t>(id)]; }
};

/// Per-metric mean and population std over runs. A metric undefined in any
/// run is reported undefined, listing those runs. Throws DomainError on no runs.
SkillReport aggregate_runs(std::span<const MetricBundle> runs);

nlohmann::json to_json(const MetricBundle& bundle);
nlohmann::json to_json(const SkillReport& report);
nlohmann::json to_json(const ConfusionMatrix& cm);

} // namespace flarecast::evaluation
