#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairpsm/psm.hpp"
#include "fairpsm/stats.hpp"

namespace fairpsm {

// Per-group decision-threshold shifts. The privileged threshold moves up by
// theta_priv (equivalently, privileged scores shift down) and the
// unprivileged threshold moves down by theta_unpriv, so the two score
// distributions move toward each other.
struct ThresholdPair {
    double theta_priv = 0.0;
    double theta_unpriv = 0.0;
    std::optional<double> p_value;      // Welch p at the chosen shifts
    double objective_dist = 0.0;        // |theta_priv| + |theta_unpriv|
    bool degenerate_fallback = false;   // a group was too small to test

    std::string to_json() const;
};

// Exhaustive search over (theta_priv, theta_unpriv) on the grid
// {0, grid_step, 2*grid_step, ...} x same, capped at 1. Shifted samples are
// clipped to [0,1] before the Welch test. Selection is lexicographic:
// maximize the two-sided p-value, break ties by minimal theta sum, then by
// smaller theta_priv.
ThresholdPair threshold_search(std::span<const double> ps_priv,
                               std::span<const double> ps_unpriv, double grid_step = 0.01);

// Matched rows keep the default rule I(score > 0.5); unmatched rows use
// I(score > 0.5 + theta_priv) when PA=1 and I(score > 0.5 - theta_unpriv)
// when PA=0.
std::vector<int> calibrated_predict(const std::vector<double>& scores, const std::vector<int>& pa,
                                    const std::vector<int64_t>& row_ids, const MatchResult& match,
                                    const ThresholdPair& thresholds);

std::vector<int> default_predict(const std::vector<double>& scores, double threshold = 0.5);

struct FairMatchFit {
    ThresholdPair thresholds;
    MatchResult match;
    PropensityScores scores;
};

// The full mitigator: score the test set, decompose it by matching, and
// search thresholds on the unmatched scores split by group. When a group has
// fewer than two unmatched members the fit falls back to identity thresholds
// and flags it.
FairMatchFit fit_fairmatch(const Learner& model, const SplitPair& split,
                           const MatchConfig& match_cfg, double grid_step = 0.01);

// The JSON mitigation certificate: thresholds plus the match metadata that,
// together with the saved model, fully determines calibrated predictions.
std::string mitigation_certificate(const FairMatchFit& fit, const std::string& model_ref);

} // namespace fairpsm
