#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairpsm/dataset.hpp"
#include "fairpsm/learners.hpp"

namespace fairpsm {

struct PropensityScores {
    std::vector<double> scores; // aligned with the test set rows
    std::string source;         // identifier of the model that produced them
};

PropensityScores propensity_scores(const Learner& model, const Dataset& test);

enum class DistanceMode { propensity, euclidean_features };

struct MatchConfig {
    size_t k = 5;            // neighbor pool size
    double caliper = 0.05;   // max within-pair distance
    DistanceMode distance_mode = DistanceMode::propensity;
};

// The two-subgroup decomposition of a test set: 1-to-1 pairs of opposite-PA
// rows within the caliper, plus the unmatched remainder.
struct MatchResult {
    std::vector<std::pair<int64_t, int64_t>> pairs; // (PA=1 row id, PA=0 row id)
    std::vector<int64_t> matched_ids;               // sorted union of pair members
    std::vector<int64_t> unmatched_ids;             // sorted remainder
    std::vector<int64_t> test_ids;                  // the full test set, input order
    MatchConfig config;

    bool is_matched(int64_t row_id) const;
    std::string to_json() const;
};

// Greedy 1-to-1 matching without replacement. PA=1 rows are visited in
// ascending row id; each looks at its k nearest not-yet-matched rows (either
// group) and takes the nearest opposite-PA one within the caliper, ties
// broken by smaller distance then smaller row id.
MatchResult match(const PropensityScores& scores, const std::vector<int>& pa,
                  const std::vector<int64_t>& row_ids, const MatchConfig& config,
                  const Matrix* features = nullptr);
MatchResult match(const PropensityScores& scores, const Dataset& test, const MatchConfig& config);

double matched_ratio(const MatchResult& result, size_t test_size);

} // namespace fairpsm
