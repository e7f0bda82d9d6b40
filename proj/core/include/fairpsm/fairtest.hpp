#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairpsm/metrics.hpp"
#include "fairpsm/psm.hpp"

namespace fairpsm {

enum class FairMetricId { aod, eod, spd, di };

std::string fair_metric_name(FairMetricId id);
FairMetricId fair_metric_from_name(const std::string& name);
std::optional<double> pick_metric(const FairnessScores& scores, FairMetricId id);

// A fairness metric traced against the fraction of unmatched test samples
// included in the evaluation set (the matched subset is always included).
struct FairnessCurve {
    FairMetricId metric = FairMetricId::di;
    std::vector<double> fractions;                                 // strictly increasing, 0..1
    std::vector<std::vector<std::optional<double>>> per_seed;      // [seed][fraction]
    std::vector<std::optional<double>> mean;                       // across seeds, per fraction
    std::vector<double> std_dev;                                   // 0 where undefined or single seed
    std::optional<double> f_auc;                                   // trapezoid over defined means
    bool has_undefined_points = false;
    uint64_t base_seed = 0;
};

std::vector<double> default_curve_grid(); // 0, 0.1, ..., 1.0

// Nested subsampling: per seed one permutation of the unmatched ids, with
// prefixes of ceil(f * |unmatched|) taken per fraction, so evaluation sets
// grow monotonically along the grid and the error band reflects seed
// variation only.
FairnessCurve fairness_curve(const Learner& model, const Dataset& test, const MatchResult& match,
                             FairMetricId metric, const std::vector<double>& grid,
                             size_t n_seeds = 20, uint64_t base_seed = 0);

// Trapezoidal integral of the defined part of the mean curve.
std::optional<double> trapezoid_auc(const std::vector<double>& fractions,
                                    const std::vector<std::optional<double>>& values);

struct SubgroupRow {
    std::string subset; // PSM_matched, class_sampled, pa_sampled, wae_sampled, original
    double ratio = 0.0;
    MetricReport report;
    // relative delta vs. the original test set per metric column; nullopt
    // when the original value is zero or either side is undefined
    std::vector<std::optional<double>> deltas;
    std::string error; // degenerate subsets are flagged, not fatal
};

struct SubgroupReport {
    std::vector<SubgroupRow> rows;
    uint64_t seed = 0;
    std::string dataset;

    const SubgroupRow* find(const std::string& subset) const;
};

struct AuditConfig {
    MatchConfig match;
    uint64_t seed = 0; // feeds the three samplers
};

// Runs matching plus the three balancing samplers on the test half and
// scores every subset against the model's default predictions.
SubgroupReport subgroup_report(const Learner& model, const SplitPair& split,
                               const AuditConfig& cfg);

// mean/std of relative deltas per (subset, metric) across many reports.
struct DeltaCell {
    double mean = 0.0;
    double std_dev = 0.0;
    size_t n = 0; // defined deltas that contributed
};

using DeltaTable = std::map<std::string, std::vector<DeltaCell>>; // subset -> per metric column

DeltaTable aggregate_deltas(const std::vector<SubgroupReport>& reports);

// Direction convention of the delta tables: an increase in a performance
// metric is an improvement, a decrease in a fairness metric is.
bool delta_is_improvement(size_t column, double delta);

} // namespace fairpsm
