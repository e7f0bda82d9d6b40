#include "fairpsm/fairmatch.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "fairpsm/errors.hpp"

namespace fairpsm {

namespace {

std::vector<double> grid_values(double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 1.0)) {
        throw InputError("threshold_search: grid_step must be in (0,1]");
    }
    std::vector<double> values;
    for (size_t i = 0;; ++i) {
        const double v = static_cast<double>(i) * grid_step;
        if (v > 1.0 + 1e-12) break;
        values.push_back(std::min(v, 1.0));
    }
    return values;
}

// Summary of a sample shifted by +delta and clipped to [0,1].
SampleSummary shifted_summary(std::span<const double> sample, double delta) {
    std::vector<double> shifted(sample.size());
    for (size_t i = 0; i < sample.size(); ++i) {
        shifted[i] = std::clamp(sample[i] + delta, 0.0, 1.0);
    }
    return summarize(shifted);
}

} // namespace

ThresholdPair threshold_search(std::span<const double> ps_priv, std::span<const double> ps_unpriv,
                               double grid_step) {
    if (ps_priv.size() < 2 || ps_unpriv.size() < 2) {
        throw DataError("threshold_search: both groups need at least 2 scores");
    }
    const std::vector<double> grid = grid_values(grid_step);

    // Shifting by a constant only moves the mean, but clipping to [0,1] can
    // change the variance too, so summaries are per grid value.
    std::vector<SampleSummary> priv_sum(grid.size()), unpriv_sum(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        priv_sum[i] = shifted_summary(ps_priv, -grid[i]);  // privileged moves down
        unpriv_sum[i] = shifted_summary(ps_unpriv, grid[i]); // unprivileged moves up
    }

    ThresholdPair best;
    bool have_best = false;
    double best_p = -1.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        for (size_t j = 0; j < grid.size(); ++j) {
            const double p = welch_from_summary(priv_sum[i], unpriv_sum[j]).p;
            const double dist = grid[i] + grid[j];
            // ascending (theta_priv, theta_unpriv) scan: strict improvements
            // implement the lexicographic rule
            if (!have_best || p > best_p || (p == best_p && dist < best.objective_dist)) {
                have_best = true;
                best_p = p;
                best.theta_priv = grid[i];
                best.theta_unpriv = grid[j];
                best.objective_dist = dist;
            }
        }
    }
    best.p_value = best_p;
    return best;
}

std::vector<int> default_predict(const std::vector<double>& scores, double threshold) {
    std::vector<int> pred(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] > threshold ? 1 : 0;
    return pred;
}

std::vector<int> calibrated_predict(const std::vector<double>& scores, const std::vector<int>& pa,
                                    const std::vector<int64_t>& row_ids, const MatchResult& match,
                                    const ThresholdPair& thresholds) {
    const size_t n = scores.size();
    if (pa.size() != n || row_ids.size() != n) throw InputError("calibrated_predict: misaligned inputs");
    if (match.test_ids.size() != n) {
        throw InputError("calibrated_predict: match result built from a different test set");
    }
    for (size_t i = 0; i < n; ++i) {
        if (match.test_ids[i] != row_ids[i]) {
            throw InputError("calibrated_predict: row ids disagree with the match result");
        }
    }
    std::vector<int> pred(n);
    for (size_t i = 0; i < n; ++i) {
        double cut = 0.5;
        if (!match.is_matched(row_ids[i])) {
            cut = pa[i] == 1 ? 0.5 + thresholds.theta_priv : 0.5 - thresholds.theta_unpriv;
        }
        pred[i] = scores[i] > cut ? 1 : 0;
    }
    return pred;
}

FairMatchFit fit_fairmatch(const Learner& model, const SplitPair& split,
                           const MatchConfig& match_cfg, double grid_step) {
    FairMatchFit fit;
    fit.scores = propensity_scores(model, split.test);
    fit.match = match(fit.scores, split.test, match_cfg);

    std::vector<double> unmatched_priv, unmatched_unpriv;
    for (size_t i = 0; i < split.test.size(); ++i) {
        if (fit.match.is_matched(split.test.row_ids[i])) continue;
        (split.test.pa[i] == 1 ? unmatched_priv : unmatched_unpriv).push_back(fit.scores.scores[i]);
    }
    if (unmatched_priv.size() < 2 || unmatched_unpriv.size() < 2) {
        // not enough unmatched data in a group: identity thresholds
        fit.thresholds.degenerate_fallback = true;
        return fit;
    }
    fit.thresholds = threshold_search(unmatched_priv, unmatched_unpriv, grid_step);
    return fit;
}

std::string ThresholdPair::to_json() const {
    nlohmann::ordered_json j;
    j["theta_priv"] = theta_priv;
    j["theta_unpriv"] = theta_unpriv;
    if (p_value) j["p_value"] = *p_value;
    else j["p_value"] = nullptr;
    j["objective_dist"] = objective_dist;
    j["degenerate_fallback"] = degenerate_fallback;
    return j.dump();
}

std::string mitigation_certificate(const FairMatchFit& fit, const std::string& model_ref) {
    nlohmann::ordered_json j;
    j["kind"] = "fairmatch-certificate";
    j["model"] = model_ref;
    j["thresholds"] = nlohmann::ordered_json::parse(fit.thresholds.to_json());
    j["match"] = nlohmann::ordered_json::parse(fit.match.to_json());
    return j.dump(2);
}

} // namespace fairpsm
