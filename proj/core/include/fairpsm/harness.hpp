#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairpsm/dataset.hpp"
#include "fairpsm/fairmatch.hpp"
#include "fairpsm/fairtest.hpp"
#include "fairpsm/stats.hpp"

namespace fairpsm {

struct DatasetSpec {
    std::string schema_path;
    std::string csv_path;
    std::string protected_attr; // empty = schema default

    std::string id() const; // "<schema name>:<protected attr>"
};

struct MethodSpec {
    enum class Kind { baseline, fairmatch, external };
    Kind kind = Kind::baseline;
    std::string name;             // unique label in reports
    std::string predictions_path; // external: CSV of (row_id, score)
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::string learner = "logistic";
    std::vector<MethodSpec> methods;
    size_t repeats = 20;
    double train_fraction = 0.7;
    uint64_t base_seed = 42;
    std::vector<uint64_t> seeds; // explicit list; empty = base_seed + i
    MatchConfig match;
    double grid_step = 0.01;
    FairMetricId curve_metric = FairMetricId::di;
    bool strict_scaling = false; // fit min-max on train only instead of globally
    size_t jobs = 0;             // worker threads; 0 = hardware concurrency

    std::vector<uint64_t> resolved_seeds() const;
    std::string to_json() const;
    std::string config_hash() const; // FNV-1a of the canonical JSON, hex
};

struct CellResult {
    std::string dataset;
    std::string method;
    uint64_t seed = 0;
    bool ok = false;
    std::string error;
    MetricReport report;
    std::optional<double> gd_perf, gd_fair;
    std::optional<double> matched_ratio;
    std::optional<ThresholdPair> thresholds; // fairmatch cells
    uint64_t split_fingerprint = 0;          // test-side row id hash
};

struct ExperimentResults {
    ExperimentConfig config;
    std::string config_hash;
    std::string toolkit_version;
    std::vector<CellResult> records; // complete grid: dataset-major, then method, then seed
    // per dataset: subgroup reports per seed plus one fairness curve
    std::map<std::string, std::vector<SubgroupReport>> subgroups;
    std::map<std::string, FairnessCurve> curves;

    bool has_failures() const;
    std::string to_json() const;
    static ExperimentResults from_json(const std::string& text);
    std::vector<double> metric_values(const std::string& dataset, const std::string& method,
                                      const std::string& metric) const;
};

// For each seed: one split, one model fit, every method evaluated on that
// identical split. Per-cell failures become failure records; the run
// continues.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

bool metric_smaller_is_better(const std::string& metric);

// Scott-Knott ranks of the methods' per-seed distributions, one table per
// dataset. Methods with fewer than two defined values are left out.
std::map<std::string, RankTable> rank_methods(const ExperimentResults& results,
                                              const std::string& metric);

// formats: any of "csv", "json", "svg". Empty list writes nothing.
std::vector<std::string> emit_reports(const ExperimentResults& results,
                                      const std::vector<std::string>& formats,
                                      const std::string& out_dir);

} // namespace fairpsm
