#include "flarecast/evaluation.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace flarecast::evaluation {

const char* metric_name(MetricId id) {
    static constexpr const char* kNames[kMetricCount] = {
        "accuracy",        "tss",          "precision_small", "recall_small", "precision_large",
        "recall_large",    "specificity",  "apss",            "hss",          "auc",
    };
    return kNames[static_cast<std::size_t>(id)];
}

ConfusionMatrix confusion(std::span<const int> labels, std::span<const double> probabilities, double threshold) {
    if (labels.empty() || labels.size() != probabilities.size()) {
        throw DomainError("confusion needs equal, nonzero numbers of labels and probabilities");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = probabilities[i] >= threshold;
        if (labels[i] != 0) {
            (predicted ? cm.tp : cm.fn)++;
        } else {
            (predicted ? cm.fp : cm.tn)++;
        }
    }
    return cm;
}

namespace {

Metric ratio(double num, double den) {
    if (den == 0.0) {
        return std::nullopt;
    }
    return num / den;
}

} // namespace

MetricBundle skill_scores(const ConfusionMatrix& cm) {
    const auto tp = static_cast<double>(cm.tp);
    const auto fp = static_cast<double>(cm.fp);
    const auto tn = static_cast<double>(cm.tn);
    const auto fn = static_cast<double>(cm.fn);
    const double pos = tp + fn;
    const double neg = fp + tn;

    MetricBundle b;
    b[MetricId::accuracy] = ratio(tp + tn, pos + neg);
    b[MetricId::precision_large] = ratio(tp, tp + fp);
    b[MetricId::recall_large] = ratio(tp, pos);
    b[MetricId::precision_small] = ratio(tn, tn + fn);
    b[MetricId::recall_small] = ratio(tn, neg);
    b[MetricId::specificity] = ratio(tn, neg);

    const auto& recall = b[MetricId::recall_large];
    const auto& specificity = b[MetricId::specificity];
    if (recall && specificity) {
        b[MetricId::tss] = *recall + *specificity - 1.0;
    }

    b[MetricId::apss] = pos < neg ? ratio(tp - fp, pos) : ratio(tn - fn, neg);
    b[MetricId::hss] = ratio(2.0 * (tp * tn - fn * fp), pos * (tn + fn) + (tp + fp) * neg);
    return b;
}

double hss_imbalance_curve(double r) {
    if (!(r > 0.0)) {
        throw DomainError("class ratio must be positive");
    }
    return 4.0 * r / ((r + 3.0) * (r + 3.0) - 8.0);
}

RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) {
        throw DomainError("roc_auc needs equal numbers of labels and scores");
    }
    const auto n_pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw DomainError("ROC analysis needs at least one positive and one negative label");
    }

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double s = scores[order[k]];
        while (k < order.size() && scores[order[k]] == s) {
            (labels[order[k]] != 0 ? tp : fp)++;
            ++k;
        }
        roc.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                              static_cast<double>(tp) / static_cast<double>(n_pos), s});
    }

    double area = 0.0;
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const auto& a = roc.points[k - 1];
        const auto& b = roc.points[k];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    roc.auc = area;
    return roc;
}

void write_roc(std::ostream& out, const RocCurve& roc) {
    out << "# fpr tpr\n";
    for (const auto& p : roc.points) {
        out << format_double(p.fpr) << ' ' << format_double(p.tpr) << '\n';
    }
}

SkillReport aggregate_runs(std::span<const MetricBundle> runs) {
    if (runs.empty()) {
        throw DomainError("aggregate_runs needs at least one run");
    }
    SkillReport report;
    report.runs = runs.size();
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        auto& summary = report.metrics[m];
        std::vector<double> values;
        for (std::size_t r = 0; r < runs.size(); ++r) {
            if (runs[r].values[m]) {
                values.push_back(*runs[r].values[m]);
            } else {
                summary.undefined_runs.push_back(r);
            }
        }
        if (!summary.undefined_runs.empty()) {
            continue;
        }
        const double n = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        summary.mean = mean;
        summary.std = values.size() == 1 ? 0.0 : std::sqrt(ss / n);
    }
    return report;
}

namespace {

nlohmann::json metric_json(const Metric& m) {
    return m ? nlohmann::json(*m) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json to_json(const MetricBundle& bundle) {
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        out[metric_name(static_cast<MetricId>(m))] = metric_json(bundle.values[m]);
    }
    return out;
}

nlohmann::json to_json(const SkillReport& report) {
    nlohmann::json metrics = nlohmann::json::object();
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        const auto& s = report.metrics[m];
        nlohmann::json entry = {{"mean", metric_json(s.mean)}, {"std", metric_json(s.std)}};
        if (!s.undefined_runs.empty()) {
            entry["undefined_runs"] = s.undefined_runs;
        }
        metrics[metric_name(static_cast<MetricId>(m))] = entry;
    }
    return {{"runs", report.runs}, {"metrics", metrics}};
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

} // namespace flarecast::evaluation
