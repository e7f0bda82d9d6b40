#include "fairpsm/psm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "fairpsm/errors.hpp"

namespace fairpsm {

PropensityScores propensity_scores(const Learner& model, const Dataset& test) {
    PropensityScores ps;
    ps.scores = model.predict(test.features);
    ps.source = model.kind();
    for (double s : ps.scores) {
        if (!std::isfinite(s)) throw InputError("propensity score is non-finite");
    }
    return ps;
}

namespace {

struct Candidate {
    double dist;
    int64_t row_id;
    size_t pos; // index into the test arrays

    bool operator<(const Candidate& other) const {
        if (dist != other.dist) return dist < other.dist;
        return row_id < other.row_id;
    }
};

double euclidean(std::span<const double> a, std::span<const double> b) {
    double ss = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

// k nearest unmatched rows (any PA) around sorted position `at`, exploiting
// that propensity distance is 1-D: expand outward, then resolve distance
// ties by row id.
std::vector<Candidate> knn_propensity(const std::vector<size_t>& by_score,
                                      const std::vector<size_t>& pos_of,
                                      const std::vector<double>& scores,
                                      const std::vector<int64_t>& row_ids,
                                      const std::vector<char>& matched, size_t query,
                                      size_t k) {
    std::vector<Candidate> found;
    const double q = scores[query];
    size_t at = pos_of[query];
    long long left = static_cast<long long>(at) - 1;
    size_t right = at + 1;
    const size_t n = by_score.size();

    auto next_dist = [&](long long idx) -> double {
        return std::fabs(scores[by_score[static_cast<size_t>(idx)]] - q);
    };
    auto kth_dist = [&]() -> double {
        return found[k - 1].dist; // valid once found is sorted and has >= k entries
    };

    // Candidates arrive in nondecreasing distance; after k are in hand keep
    // pulling while the frontier ties the k-th distance so that row-id
    // tie-breaking sees every contender.
    for (;;) {
        double dl = left >= 0 ? next_dist(left) : std::numeric_limits<double>::infinity();
        double dr = right < n ? next_dist(static_cast<long long>(right)) : std::numeric_limits<double>::infinity();
        if (std::isinf(dl) && std::isinf(dr)) break;
        size_t pick;
        if (dl <= dr) {
            pick = by_score[static_cast<size_t>(left)];
            --left;
        } else {
            pick = by_score[right];
            ++right;
        }
        const double d = std::fabs(scores[pick] - q);
        if (!matched[pick]) found.push_back({d, row_ids[pick], pick});
        if (found.size() >= k) {
            std::sort(found.begin(), found.end());
            const double cut = kth_dist();
            double frontier = std::min(left >= 0 ? next_dist(left) : std::numeric_limits<double>::infinity(),
                                       right < n ? next_dist(static_cast<long long>(right))
                                                 : std::numeric_limits<double>::infinity());
            if (frontier > cut) break;
        }
    }
    std::sort(found.begin(), found.end());
    if (found.size() > k) found.resize(k);
    return found;
}

std::vector<Candidate> knn_euclidean(const Matrix& features, const std::vector<int64_t>& row_ids,
                                     const std::vector<char>& matched, size_t query, size_t k) {
    std::vector<Candidate> all;
    all.reserve(features.rows());
    const auto q = features.row(query);
    for (size_t j = 0; j < features.rows(); ++j) {
        if (j == query || matched[j]) continue;
        all.push_back({euclidean(q, features.row(j)), row_ids[j], j});
    }
    std::sort(all.begin(), all.end());
    if (all.size() > k) all.resize(k);
    return all;
}

} // namespace

MatchResult match(const PropensityScores& scores, const std::vector<int>& pa,
                  const std::vector<int64_t>& row_ids, const MatchConfig& config,
                  const Matrix* features) {
    const size_t n = scores.scores.size();
    if (pa.size() != n || row_ids.size() != n) throw InputError("match: misaligned inputs");
    if (config.k == 0) throw InputError("match: k must be positive");
    if (config.caliper < 0) throw InputError("match: caliper must be >= 0");
    if (config.distance_mode == DistanceMode::euclidean_features &&
        (features == nullptr || features->rows() != n)) {
        throw InputError("match: euclidean mode needs the test feature matrix");
    }

    MatchResult result;
    result.config = config;
    result.test_ids = row_ids;

    // treatment rows in ascending row id
    std::vector<size_t> treatment;
    for (size_t i = 0; i < n; ++i) {
        if (pa[i] == 1) treatment.push_back(i);
    }
    std::sort(treatment.begin(), treatment.end(),
              [&](size_t a, size_t b) { return row_ids[a] < row_ids[b]; });

    std::vector<size_t> by_score, pos_of;
    if (config.distance_mode == DistanceMode::propensity) {
        by_score.resize(n);
        std::iota(by_score.begin(), by_score.end(), size_t{0});
        std::sort(by_score.begin(), by_score.end(), [&](size_t a, size_t b) {
            if (scores.scores[a] != scores.scores[b]) return scores.scores[a] < scores.scores[b];
            return row_ids[a] < row_ids[b];
        });
        pos_of.resize(n);
        for (size_t p = 0; p < n; ++p) pos_of[by_score[p]] = p;
    }

    std::vector<char> matched(n, 0);
    for (size_t t : treatment) {
        const auto pool =
            config.distance_mode == DistanceMode::propensity
                ? knn_propensity(by_score, pos_of, scores.scores, row_ids, matched, t, config.k)
                : knn_euclidean(*features, row_ids, matched, t, config.k);
        const Candidate* pick = nullptr;
        for (const auto& cand : pool) { // pool is sorted by (dist, row_id)
            if (pa[cand.pos] != pa[t] && cand.dist <= config.caliper) {
                pick = &cand;
                break;
            }
        }
        if (pick) {
            matched[t] = matched[pick->pos] = 1;
            result.pairs.emplace_back(row_ids[t], pick->row_id);
        }
    }

    for (size_t i = 0; i < n; ++i) {
        (matched[i] ? result.matched_ids : result.unmatched_ids).push_back(row_ids[i]);
    }
    std::sort(result.matched_ids.begin(), result.matched_ids.end());
    std::sort(result.unmatched_ids.begin(), result.unmatched_ids.end());
    return result;
}

MatchResult match(const PropensityScores& scores, const Dataset& test, const MatchConfig& config) {
    return match(scores, test.pa, test.row_ids, config, &test.features);
}

bool MatchResult::is_matched(int64_t row_id) const {
    return std::binary_search(matched_ids.begin(), matched_ids.end(), row_id);
}

std::string MatchResult::to_json() const {
    nlohmann::ordered_json j;
    auto& pairs_json = j["pairs"] = nlohmann::ordered_json::array();
    for (const auto& [t, c] : pairs) pairs_json.push_back({t, c});
    j["unmatched"] = unmatched_ids;
    j["config"] = {{"k", config.k},
                   {"caliper", config.caliper},
                   {"distance",
                    config.distance_mode == DistanceMode::propensity ? "propensity" : "euclidean"}};
    return j.dump();
}

double matched_ratio(const MatchResult& result, size_t test_size) {
    if (test_size == 0) throw InputError("matched_ratio: empty test set");
    return static_cast<double>(result.matched_ids.size()) / static_cast<double>(test_size);
}

} // namespace fairpsm
