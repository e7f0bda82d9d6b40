#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fairpsm/errors.hpp"
#include "fairpsm/fairmatch.hpp"
#include "fairpsm/psm.hpp"
#include "fairpsm/rng.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fairpsm;

namespace {

PropensityScores ps_of(std::vector<double> scores) {
    return {std::move(scores), "test"};
}

std::vector<int64_t> ids_upto(size_t n) {
    std::vector<int64_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = static_cast<int64_t>(i);
    return ids;
}

void check_invariants(const MatchResult& r, const std::vector<int>& pa,
                      const std::vector<double>& scores, const std::vector<int64_t>& ids,
                      double caliper) {
    // disjoint pairs, opposite PA, caliper respected
    std::set<int64_t> seen;
    size_t priv_count = 0, unpriv_count = 0;
    for (const auto& [t, c] : r.pairs) {
        CHECK(seen.insert(t).second);
        CHECK(seen.insert(c).second);
        const auto t_pos = static_cast<size_t>(std::find(ids.begin(), ids.end(), t) - ids.begin());
        const auto c_pos = static_cast<size_t>(std::find(ids.begin(), ids.end(), c) - ids.begin());
        CHECK(pa[t_pos] == 1);
        CHECK(pa[c_pos] == 0);
        CHECK(std::fabs(scores[t_pos] - scores[c_pos]) <= caliper);
        ++priv_count;
        ++unpriv_count;
    }
    CHECK(priv_count == unpriv_count);
    // matched + unmatched partition the test ids
    std::set<int64_t> all(r.matched_ids.begin(), r.matched_ids.end());
    CHECK(all.size() == r.matched_ids.size());
    for (int64_t id : r.unmatched_ids) CHECK(all.insert(id).second);
    CHECK(all == std::set<int64_t>(ids.begin(), ids.end()));
    CHECK(r.matched_ids.size() == 2 * r.pairs.size());
}

} // namespace

TEST_CASE("propensity scores: zero model gives 0.5 and identical rows agree") {
    auto d = helpers::make_dataset({0, 1, 0, 1}, {1, 0, 1, 0},
                                   {{0.3, 0.3}, {0.3, 0.3}, {0.7, 0.1}, {0.2, 0.9}});
    LogisticModel zero;
    zero.weights = {0.0, 0.0};
    auto learner = wrap(zero);
    const auto ps = propensity_scores(*learner, d);
    for (double s : ps.scores) CHECK(s == 0.5);

    LogisticModel m;
    m.weights = {1.0, -2.0};
    m.bias = 0.25;
    auto l2 = wrap(m);
    const auto ps2 = propensity_scores(*l2, d);
    CHECK(ps2.scores[0] == ps2.scores[1]); // identical rows
    // direct sigmoid evaluation
    CHECK(ps2.scores[2] == doctest::Approx(sigmoid(1.0 * 0.7 - 2.0 * 0.1 + 0.25)).epsilon(1e-15));
}

TEST_CASE("match: two opposite rows with equal scores pair up") {
    const auto r = match(ps_of({0.4, 0.4}), {1, 0}, ids_upto(2), {});
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.unmatched_ids.empty());
    CHECK(r.pairs[0].first == 0);
    CHECK(r.pairs[0].second == 1);
}

TEST_CASE("match: single-group input yields no pairs") {
    const auto r = match(ps_of({0.1, 0.2, 0.3}), {1, 1, 1}, ids_upto(3), {});
    CHECK(r.pairs.empty());
    CHECK(r.unmatched_ids.size() == 3);
    const auto r2 = match(ps_of({}), {}, {}, {});
    CHECK(r2.pairs.empty());
}

TEST_CASE("match: derived 4-row instance agrees with the enumeration oracle") {
    // P:0.30 P:0.90 U:0.31 U:0.60, caliper 0.05
    const std::vector<double> scores = {0.30, 0.90, 0.31, 0.60};
    const std::vector<int> pa = {1, 1, 0, 0};
    MatchConfig cfg;
    cfg.caliper = 0.05;
    const auto r = match(ps_of(scores), pa, ids_upto(4), cfg);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].first == 0);  // the 0.30 row
    CHECK(r.pairs[0].second == 2); // the 0.31 row
    CHECK(r.unmatched_ids == std::vector<int64_t>{1, 3});

    const auto best = oracles::best_pairing(scores, pa, cfg.caliper);
    CHECK(best.max_pairs == r.pairs.size());
    CHECK(best.min_total_dist == doctest::Approx(0.01));
}

TEST_CASE("match: caliper excludes distant candidates") {
    MatchConfig cfg;
    cfg.caliper = 0.01;
    const auto r = match(ps_of({0.2, 0.5}), {1, 0}, ids_upto(2), cfg);
    CHECK(r.pairs.empty());
    CHECK(r.unmatched_ids.size() == 2);
}

TEST_CASE("match: k pool can be exhausted by same-group neighbors") {
    // row 0's single-slot pool holds same-PA row 1 (0.08 < 0.10), so row 0
    // stays unmatched even though an opposite row exists within the caliper
    MatchConfig cfg;
    cfg.k = 1;
    cfg.caliper = 1.0;
    const auto r = match(ps_of({0.50, 0.58, 0.60}), {1, 1, 0}, ids_upto(3), cfg);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].first == 1); // row 1's nearest is the opposite-PA row 2
    CHECK(r.unmatched_ids == std::vector<int64_t>{0});
}

TEST_CASE("match: euclidean feature distance mode") {
    auto d = helpers::make_dataset({1, 0, 1, 0}, {1, 0, 0, 0},
                                   {{0.0, 0.0}, {0.1, 0.0}, {0.9, 0.9}, {0.5, 0.5}});
    PropensityScores ps = ps_of({0.5, 0.5, 0.5, 0.5});
    MatchConfig cfg;
    cfg.distance_mode = DistanceMode::euclidean_features;
    cfg.caliper = 0.2;
    const auto r = match(ps, d, cfg);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].first == 0);
    CHECK(r.pairs[0].second == 1); // nearest in feature space
    CHECK_THROWS_AS(match(ps, d.pa, d.row_ids, cfg, nullptr), InputError);
}

TEST_CASE("matched_ratio: endpoints") {
    const auto none = match(ps_of({0.1, 0.9}), {1, 1}, ids_upto(2), {});
    CHECK(matched_ratio(none, 2) == 0.0);
    const auto all = match(ps_of({0.4, 0.4}), {1, 0}, ids_upto(2), {});
    CHECK(matched_ratio(all, 2) == 1.0);
    CHECK_THROWS_AS(matched_ratio(all, 0), InputError);
}

TEST_CASE("match result JSON names pairs, unmatched and the config") {
    const auto r = match(ps_of({0.4, 0.4, 0.9}), {1, 0, 0}, ids_upto(3), {});
    const std::string j = r.to_json();
    CHECK(j.find("\"pairs\":[[0,1]]") != std::string::npos);
    CHECK(j.find("\"unmatched\":[2]") != std::string::npos);
    CHECK(j.find("\"k\":5") != std::string::npos);
}

TEST_CASE("property: matching invariants on 1000 random instances") {
    Rng rng(211);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t n = 2 + rng.below(40);
        std::vector<double> scores(n);
        std::vector<int> pa(n);
        for (size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform01();
            pa[i] = rng.uniform01() < 0.5;
        }
        MatchConfig cfg;
        cfg.k = 1 + rng.below(8);
        cfg.caliper = rng.uniform01() * 0.3;
        const auto ids = ids_upto(n);
        const auto r = match(ps_of(scores), pa, ids, cfg);
        check_invariants(r, pa, scores, ids, cfg.caliper);
    }
}

TEST_CASE("property: enlarging the caliper never loses pairs") {
    Rng rng(223);
    for (int trial = 0; trial < 400; ++trial) {
        const size_t n = 2 + rng.below(30);
        std::vector<double> scores(n);
        std::vector<int> pa(n);
        for (size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform01();
            pa[i] = rng.uniform01() < 0.5;
        }
        MatchConfig small, large;
        small.k = large.k = 1 + rng.below(6);
        small.caliper = rng.uniform01() * 0.1;
        large.caliper = small.caliper + rng.uniform01() * 0.3;
        const auto ids = ids_upto(n);
        const auto few = match(ps_of(scores), pa, ids, small);
        const auto more = match(ps_of(scores), pa, ids, large);
        CHECK(more.pairs.size() >= few.pairs.size());
    }
}

TEST_CASE("property: score proximity forces prediction agreement inside pairs") {
    // when no score sits within the caliper of the 0.5 boundary, both members
    // of every pair land on the same side of it
    Rng rng(227);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 4 + rng.below(40);
        const double caliper = 0.02 + rng.uniform01() * 0.05;
        std::vector<double> scores(n);
        std::vector<int> pa(n);
        for (size_t i = 0; i < n; ++i) {
            double s = rng.uniform01();
            if (std::fabs(s - 0.5) <= caliper) s = s < 0.5 ? 0.5 - caliper - 0.01 : 0.5 + caliper + 0.01;
            scores[i] = std::clamp(s, 0.0, 1.0);
            pa[i] = rng.uniform01() < 0.5;
        }
        MatchConfig cfg;
        cfg.caliper = caliper;
        const auto ids = ids_upto(n);
        const auto r = match(ps_of(scores), pa, ids, cfg);
        const auto pred = default_predict(scores);
        for (const auto& [t, c] : r.pairs) {
            CHECK(pred[static_cast<size_t>(t)] == pred[static_cast<size_t>(c)]);
        }
    }
}
