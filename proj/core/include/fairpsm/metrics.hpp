#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fairpsm {

struct ConfusionMatrix {
    size_t tp = 0, fp = 0, tn = 0, fn = 0;
    size_t total() const { return tp + fp + tn + fn; }
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Group-conditional rates; nullopt marks a zero denominator.
struct GroupRates {
    std::optional<double> tpr_p, fpr_p, tpr_u, fpr_u;
    std::optional<double> fav_rate_p, fav_rate_u;
};

// Eight scores on the 0-100 reporting scale. Fairness entries are absolute
// deviations: aod/eod/spd as |difference| x 100, di as |1 - ratio| x 100
// (the ratio form leaves di unbounded above 100; no cap is applied).
struct MetricReport {
    std::optional<double> accuracy, precision, recall, f1;
    std::optional<double> aod, eod, spd, di;
    GroupRates rates;

    static const std::vector<std::string>& column_names(); // fixed CSV order
    std::vector<std::optional<double>> values() const;
    std::string to_json() const;
    std::string to_csv_row() const; // undefined -> empty cell
};

struct PerformanceScores {
    std::optional<double> accuracy, precision, recall, f1;
};

PerformanceScores performance_metrics(const ConfusionMatrix& cm);

struct FairnessScores {
    std::optional<double> aod, eod, spd, di;
    GroupRates rates;
};

// pa: 1 = privileged, 0 = unprivileged; both groups must be present.
FairnessScores group_fairness(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                              const std::vector<int>& pa);

MetricReport evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                      const std::vector<int>& pa);

// Metric values paired with their per-metric optima (100 for performance
// scores, 0 for fairness deviations).
struct MetricVector {
    std::vector<double> values;
    std::vector<double> optimal;
};

double generational_distance(const MetricVector& mv);

// GD over the defined entries of a report; undefined metrics are excluded
// and N shrinks accordingly.
std::optional<double> performance_gd(const MetricReport& report);
std::optional<double> fairness_gd(const MetricReport& report);

// Paper-style table rounding: half away from zero to integer.
long long round_half_away(double value);

} // namespace fairpsm
