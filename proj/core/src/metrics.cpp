#include "fairpsm/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "fairpsm/errors.hpp"

namespace fairpsm {

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) throw InputError("confusion: length mismatch");
    if (y_true.empty()) throw InputError("confusion: empty input");
    ConfusionMatrix cm;
    for (size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1) {
            y_pred[i] == 1 ? ++cm.tp : ++cm.fn;
        } else {
            y_pred[i] == 1 ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

PerformanceScores performance_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw InputError("performance_metrics: empty confusion matrix");
    PerformanceScores s;
    const auto d = [](size_t v) { return static_cast<double>(v); };
    s.accuracy = 100.0 * (d(cm.tp) + d(cm.tn)) / d(cm.total());
    if (cm.tp + cm.fp > 0) s.precision = 100.0 * d(cm.tp) / d(cm.tp + cm.fp);
    if (cm.tp + cm.fn > 0) s.recall = 100.0 * d(cm.tp) / d(cm.tp + cm.fn);
    if (s.precision && s.recall && (*s.precision + *s.recall) > 0) {
        s.f1 = 2.0 * (*s.precision) * (*s.recall) / (*s.precision + *s.recall);
    }
    return s;
}

FairnessScores group_fairness(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                              const std::vector<int>& pa) {
    if (y_true.size() != y_pred.size() || y_true.size() != pa.size()) {
        throw InputError("group_fairness: length mismatch");
    }
    size_t n_p = 0, n_u = 0;
    ConfusionMatrix cm_p, cm_u;
    size_t fav_p = 0, fav_u = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
        ConfusionMatrix& cm = pa[i] == 1 ? cm_p : cm_u;
        (pa[i] == 1 ? n_p : n_u)++;
        if (y_pred[i] == 1) (pa[i] == 1 ? fav_p : fav_u)++;
        if (y_true[i] == 1) {
            y_pred[i] == 1 ? ++cm.tp : ++cm.fn;
        } else {
            y_pred[i] == 1 ? ++cm.fp : ++cm.tn;
        }
    }
    if (n_p == 0 || n_u == 0) throw DataError("group_fairness: a protected group is empty");

    FairnessScores s;
    const auto rate = [](size_t num, size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    s.rates.tpr_p = rate(cm_p.tp, cm_p.tp + cm_p.fn);
    s.rates.fpr_p = rate(cm_p.fp, cm_p.fp + cm_p.tn);
    s.rates.tpr_u = rate(cm_u.tp, cm_u.tp + cm_u.fn);
    s.rates.fpr_u = rate(cm_u.fp, cm_u.fp + cm_u.tn);
    s.rates.fav_rate_p = rate(fav_p, n_p);
    s.rates.fav_rate_u = rate(fav_u, n_u);

    // signed quantities per definition, reported as |.| x 100
    if (s.rates.fpr_u && s.rates.fpr_p && s.rates.tpr_u && s.rates.tpr_p) {
        const double aod =
            ((*s.rates.fpr_u - *s.rates.fpr_p) + (*s.rates.tpr_u - *s.rates.tpr_p)) / 2.0;
        s.aod = 100.0 * std::fabs(aod);
    }
    if (s.rates.tpr_u && s.rates.tpr_p) {
        s.eod = 100.0 * std::fabs(*s.rates.tpr_u - *s.rates.tpr_p);
    }
    s.spd = 100.0 * std::fabs(*s.rates.fav_rate_u - *s.rates.fav_rate_p);
    if (*s.rates.fav_rate_p > 0) {
        const double ratio = *s.rates.fav_rate_u / *s.rates.fav_rate_p;
        s.di = 100.0 * std::fabs(1.0 - ratio);
    }
    return s;
}

MetricReport evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                      const std::vector<int>& pa) {
    MetricReport r;
    const PerformanceScores p = performance_metrics(confusion(y_true, y_pred));
    r.accuracy = p.accuracy;
    r.precision = p.precision;
    r.recall = p.recall;
    r.f1 = p.f1;
    const FairnessScores f = group_fairness(y_true, y_pred, pa);
    r.aod = f.aod;
    r.eod = f.eod;
    r.spd = f.spd;
    r.di = f.di;
    r.rates = f.rates;
    return r;
}

const std::vector<std::string>& MetricReport::column_names() {
    static const std::vector<std::string> names = {"accuracy", "precision", "recall", "f1",
                                                   "aod",      "eod",       "spd",    "di"};
    return names;
}

std::vector<std::optional<double>> MetricReport::values() const {
    return {accuracy, precision, recall, f1, aod, eod, spd, di};
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    const auto& names = column_names();
    const auto vals = values();
    for (size_t i = 0; i < names.size(); ++i) {
        if (vals[i]) j[names[i]] = *vals[i];
        else j[names[i]] = nullptr;
    }
    return j.dump();
}

std::string MetricReport::to_csv_row() const {
    std::ostringstream out;
    const auto vals = values();
    for (size_t i = 0; i < vals.size(); ++i) {
        if (i) out << ',';
        if (vals[i]) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", *vals[i]);
            out << buf;
        }
    }
    return out.str();
}

double generational_distance(const MetricVector& mv) {
    if (mv.values.size() != mv.optimal.size()) throw InputError("generational_distance: length mismatch");
    if (mv.values.empty()) throw InputError("generational_distance: empty vector");
    double sum = 0.0;
    for (size_t i = 0; i < mv.values.size(); ++i) {
        const double diff = mv.values[i] - mv.optimal[i];
        sum += std::sqrt(diff * diff);
    }
    return sum / static_cast<double>(mv.values.size());
}

namespace {

std::optional<double> gd_over(const std::vector<std::optional<double>>& entries, double optimal) {
    MetricVector mv;
    for (const auto& e : entries) {
        if (e) {
            mv.values.push_back(*e);
            mv.optimal.push_back(optimal);
        }
    }
    if (mv.values.empty()) return std::nullopt;
    return generational_distance(mv);
}

} // namespace

std::optional<double> performance_gd(const MetricReport& r) {
    return gd_over({r.accuracy, r.precision, r.recall, r.f1}, 100.0);
}

std::optional<double> fairness_gd(const MetricReport& r) {
    return gd_over({r.aod, r.eod, r.spd, r.di}, 0.0);
}

long long round_half_away(double value) {
    return static_cast<long long>(value >= 0 ? std::floor(value + 0.5) : std::ceil(value - 0.5));
}

} // namespace fairpsm
