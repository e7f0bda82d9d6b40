#include "fairpsm/fairtest.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "fairpsm/errors.hpp"
#include "fairpsm/fairmatch.hpp"
#include "fairpsm/rng.hpp"
#include "fairpsm/sampling.hpp"

namespace fairpsm {

std::string fair_metric_name(FairMetricId id) {
    switch (id) {
        case FairMetricId::aod: return "aod";
        case FairMetricId::eod: return "eod";
        case FairMetricId::spd: return "spd";
        case FairMetricId::di: return "di";
    }
    return "?";
}

FairMetricId fair_metric_from_name(const std::string& name) {
    if (name == "aod") return FairMetricId::aod;
    if (name == "eod") return FairMetricId::eod;
    if (name == "spd") return FairMetricId::spd;
    if (name == "di") return FairMetricId::di;
    throw ConfigError("unknown fairness metric \"" + name + "\" (aod, eod, spd, di)");
}

std::optional<double> pick_metric(const FairnessScores& scores, FairMetricId id) {
    switch (id) {
        case FairMetricId::aod: return scores.aod;
        case FairMetricId::eod: return scores.eod;
        case FairMetricId::spd: return scores.spd;
        case FairMetricId::di: return scores.di;
    }
    return std::nullopt;
}

std::vector<double> default_curve_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

std::optional<double> trapezoid_auc(const std::vector<double>& fractions,
                                    const std::vector<std::optional<double>>& values) {
    double auc = 0.0;
    bool any = false;
    // integrate over consecutive defined points; undefined points drop their
    // adjacent segments
    for (size_t i = 0; i + 1 < fractions.size(); ++i) {
        if (!values[i] || !values[i + 1]) continue;
        auc += 0.5 * (*values[i] + *values[i + 1]) * (fractions[i + 1] - fractions[i]);
        any = true;
    }
    if (!any) return std::nullopt;
    return auc;
}

FairnessCurve fairness_curve(const Learner& model, const Dataset& test, const MatchResult& match,
                             FairMetricId metric, const std::vector<double>& grid, size_t n_seeds,
                             uint64_t base_seed) {
    if (n_seeds == 0) throw InputError("fairness_curve: n_seeds must be >= 1");
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(grid[i] < grid[i + 1])) throw InputError("fairness_curve: grid must be strictly increasing");
    }
    if (grid.empty() || grid.front() != 0.0 || grid.back() != 1.0) {
        throw InputError("fairness_curve: grid must start at 0 and end at 1");
    }

    const std::vector<double> scores = model.predict(test.features);
    const std::vector<int> pred = default_predict(scores);

    // positions of matched / unmatched rows
    std::vector<size_t> matched_pos, unmatched_pos;
    for (size_t i = 0; i < test.size(); ++i) {
        (match.is_matched(test.row_ids[i]) ? matched_pos : unmatched_pos).push_back(i);
    }
    // ascending row id so the permutation is a pure function of the seed
    std::sort(unmatched_pos.begin(), unmatched_pos.end(),
              [&](size_t a, size_t b) { return test.row_ids[a] < test.row_ids[b]; });

    FairnessCurve curve;
    curve.metric = metric;
    curve.fractions = grid;
    curve.base_seed = base_seed;
    curve.per_seed.resize(n_seeds);

    for (size_t s = 0; s < n_seeds; ++s) {
        std::vector<size_t> perm = unmatched_pos;
        Rng rng(base_seed + s);
        shuffle(perm, rng);

        auto& row = curve.per_seed[s];
        row.reserve(grid.size());
        for (double f : grid) {
            const size_t take = static_cast<size_t>(
                std::ceil(f * static_cast<double>(perm.size()) - 1e-9));
            std::vector<int> yt, yp, pa;
            yt.reserve(matched_pos.size() + take);
            for (size_t p : matched_pos) {
                yt.push_back(test.labels[p]);
                yp.push_back(pred[p]);
                pa.push_back(test.pa[p]);
            }
            for (size_t i = 0; i < take; ++i) {
                const size_t p = perm[i];
                yt.push_back(test.labels[p]);
                yp.push_back(pred[p]);
                pa.push_back(test.pa[p]);
            }
            std::optional<double> value;
            try {
                value = pick_metric(group_fairness(yt, yp, pa), metric);
            } catch (const DataError&) {
                value = std::nullopt; // a group vanished at this fraction
            }
            if (!value) curve.has_undefined_points = true;
            row.push_back(value);
        }
    }

    // mean / std across seeds per fraction
    curve.mean.resize(grid.size());
    curve.std_dev.assign(grid.size(), 0.0);
    for (size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> defined;
        for (size_t s = 0; s < n_seeds; ++s) {
            if (curve.per_seed[s][g]) defined.push_back(*curve.per_seed[s][g]);
        }
        if (defined.empty()) {
            curve.mean[g] = std::nullopt;
            continue;
        }
        const SampleSummary sum = summarize(defined);
        curve.mean[g] = sum.mean;
        curve.std_dev[g] = defined.size() >= 2 ? std::sqrt(sum.variance) : 0.0;
    }
    curve.f_auc = trapezoid_auc(curve.fractions, curve.mean);
    return curve;
}

namespace {

MetricReport evaluate_positions(const Dataset& test, const std::vector<int>& pred,
                                const std::vector<size_t>& positions) {
    std::vector<int> yt, yp, pa;
    yt.reserve(positions.size());
    for (size_t p : positions) {
        yt.push_back(test.labels[p]);
        yp.push_back(pred[p]);
        pa.push_back(test.pa[p]);
    }
    return evaluate(yt, yp, pa);
}

std::vector<std::optional<double>> relative_deltas(const MetricReport& subset,
                                                   const MetricReport& original) {
    const auto sub = subset.values();
    const auto orig = original.values();
    std::vector<std::optional<double>> deltas(sub.size());
    for (size_t i = 0; i < sub.size(); ++i) {
        if (!sub[i] || !orig[i] || *orig[i] == 0.0) continue;
        deltas[i] = (*sub[i] - *orig[i]) / *orig[i];
    }
    return deltas;
}

} // namespace

SubgroupReport subgroup_report(const Learner& model, const SplitPair& split,
                               const AuditConfig& cfg) {
    const Dataset& test = split.test;
    const std::vector<double> scores = model.predict(test.features);
    const std::vector<int> pred = default_predict(scores);

    std::vector<size_t> all(test.size());
    for (size_t i = 0; i < test.size(); ++i) all[i] = i;

    SubgroupReport out;
    out.seed = cfg.seed;
    out.dataset = test.schema.name;

    SubgroupRow original;
    original.subset = "original";
    original.ratio = 1.0;
    original.report = evaluate_positions(test, pred, all);
    original.deltas.assign(MetricReport::column_names().size(), 0.0);

    PropensityScores ps{scores, model.kind()};
    const MatchResult mr = match(ps, test, cfg.match);
    std::vector<size_t> matched_pos;
    for (size_t i = 0; i < test.size(); ++i) {
        if (mr.is_matched(test.row_ids[i])) matched_pos.push_back(i);
    }

    auto add_row = [&](const std::string& name, const std::vector<size_t>& positions) {
        SubgroupRow row;
        row.subset = name;
        row.ratio = static_cast<double>(positions.size()) / static_cast<double>(test.size());
        try {
            if (positions.empty()) throw DataError("empty subset");
            row.report = evaluate_positions(test, pred, positions);
            row.deltas = relative_deltas(row.report, original.report);
        } catch (const std::exception& e) {
            row.error = e.what();
            row.deltas.assign(MetricReport::column_names().size(), std::nullopt);
        }
        out.rows.push_back(std::move(row));
    };

    add_row("PSM_matched", matched_pos);
    for (auto strategy : {SamplingStrategy::class_based, SamplingStrategy::pa_based,
                          SamplingStrategy::wae}) {
        std::string name;
        try {
            SampleSelection sel;
            switch (strategy) {
                case SamplingStrategy::class_based:
                    name = "class_sampled";
                    sel = class_balanced(test, cfg.seed);
                    break;
                case SamplingStrategy::pa_based:
                    name = "pa_sampled";
                    sel = pa_balanced(test, cfg.seed);
                    break;
                case SamplingStrategy::wae:
                    name = "wae_sampled";
                    sel = wae_balanced(test, cfg.seed);
                    break;
            }
            add_row(name, selection_positions(sel, test));
        } catch (const std::exception& e) {
            SubgroupRow row;
            row.subset = name;
            row.error = e.what();
            row.deltas.assign(MetricReport::column_names().size(), std::nullopt);
            out.rows.push_back(std::move(row));
        }
    }
    out.rows.push_back(std::move(original));
    return out;
}

const SubgroupRow* SubgroupReport::find(const std::string& subset) const {
    for (const auto& row : rows) {
        if (row.subset == subset) return &row;
    }
    return nullptr;
}

DeltaTable aggregate_deltas(const std::vector<SubgroupReport>& reports) {
    if (reports.empty()) throw InputError("aggregate_deltas: no reports");
    const size_t n_cols = MetricReport::column_names().size();
    std::map<std::string, std::vector<std::vector<double>>> collected;
    for (const auto& report : reports) {
        for (const auto& row : report.rows) {
            if (row.subset == "original") continue;
            auto& cols = collected[row.subset];
            cols.resize(n_cols);
            for (size_t c = 0; c < n_cols && c < row.deltas.size(); ++c) {
                if (row.deltas[c]) cols[c].push_back(*row.deltas[c]);
            }
        }
    }
    DeltaTable table;
    for (auto& [subset, cols] : collected) {
        auto& cells = table[subset];
        cells.resize(n_cols);
        for (size_t c = 0; c < n_cols; ++c) {
            if (cols[c].empty()) continue;
            const SampleSummary sum = summarize(cols[c]);
            cells[c].mean = sum.mean;
            cells[c].std_dev = cols[c].size() >= 2 ? std::sqrt(sum.variance) : 0.0;
            cells[c].n = cols[c].size();
        }
    }
    return table;
}

bool delta_is_improvement(size_t column, double delta) {
    return column < 4 ? delta > 0.0 : delta < 0.0;
}

} // namespace fairpsm
