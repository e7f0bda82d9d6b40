#include <doctest.h>

#include <cmath>

#include "fairpsm/errors.hpp"
#include "fairpsm/rng.hpp"
#include "fairpsm/stats.hpp"
#include "oracles.hpp"

using namespace fairpsm;

TEST_CASE("t cdf matches quadrature to 1e-10") {
    for (double df : {1.0, 2.0, 3.5, 7.0, 19.0, 38.21, 120.0}) {
        for (double t : {0.0, 0.3, 1.0, 2.5, 5.0, -1.7, -4.2}) {
            const double two_sided = oracles::t_two_sided_p(t, df);
            const double mine = t >= 0 ? 2.0 * (1.0 - student_t_cdf(t, df))
                                       : 2.0 * student_t_cdf(t, df);
            CHECK(std::fabs(mine - two_sided) <= 1e-10);
        }
    }
    CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("welch: identical samples give t=0, p=1") {
    const std::vector<double> a = {1, 2, 3, 4};
    const auto r = welch_ttest(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
}

TEST_CASE("welch: zero-variance conventions") {
    const auto diff = welch_ttest(std::vector<double>{0, 0}, std::vector<double>{1, 1});
    CHECK(diff.p == 0.0);
    const auto same = welch_ttest(std::vector<double>{2, 2}, std::vector<double>{2, 2});
    CHECK(same.p == 1.0);
}

TEST_CASE("welch: reference instance against the quadrature oracle") {
    const std::vector<double> a = {1, 2, 3, 4, 5};
    const std::vector<double> b = {2, 3, 4, 5, 6};
    const auto r = welch_ttest(a, b);
    const auto ref = oracles::welch_oracle(a, b);
    CHECK(r.t == doctest::Approx(ref.t).epsilon(1e-12));
    CHECK(r.df == doctest::Approx(ref.df).epsilon(1e-12));
    CHECK(std::fabs(r.p - ref.p) <= 1e-8);
}

TEST_CASE("welch: errors on tiny or non-finite samples") {
    CHECK_THROWS_AS(welch_ttest(std::vector<double>{1.0}, std::vector<double>{1, 2}), InputError);
    CHECK_THROWS_AS(welch_ttest(std::vector<double>{1, INFINITY}, std::vector<double>{1, 2}),
                    InputError);
}

TEST_CASE("property: welch is antisymmetric in t and symmetric in p") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t na = 2 + rng.below(10), nb = 2 + rng.below(10);
        std::vector<double> a(na), b(nb);
        for (auto& v : a) v = rng.uniform01();
        for (auto& v : b) v = rng.uniform01();
        const auto ab = welch_ttest(a, b);
        const auto ba = welch_ttest(b, a);
        CHECK(ab.t == -ba.t);
        CHECK(ab.p == ba.p);
        CHECK(ab.df == ba.df);
        // and the quadrature oracle agrees
        CHECK(std::fabs(ab.p - oracles::t_two_sided_p(ab.t, ab.df)) <= 1e-8);
    }
}

TEST_CASE("cliffs delta: examples") {
    const std::vector<double> a = {1, 2, 3};
    CHECK(cliffs_delta(a, a).delta == 0.0);

    // strictly separated samples
    CHECK(cliffs_delta(std::vector<double>{5, 6}, std::vector<double>{1, 2}).delta == 1.0);

    // brute force over the 4 pairs: a>b never, a<b three times -> -3/4
    const auto e = cliffs_delta(std::vector<double>{1, 2}, std::vector<double>{2, 3});
    CHECK(e.delta == doctest::Approx(-0.75));
    CHECK(e.delta == doctest::Approx(
              oracles::cliffs_delta_brute(std::vector<double>{1, 2}, std::vector<double>{2, 3})));
    CHECK(!e.negligible);

    CHECK(cliffs_delta(std::vector<double>{1, 1.1}, std::vector<double>{1, 1.1}).negligible);
    CHECK_THROWS_AS(cliffs_delta(std::vector<double>{}, a), InputError);
}

TEST_CASE("property: cliffs delta matches brute force and is antisymmetric") {
    Rng rng(103);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t na = 1 + rng.below(15), nb = 1 + rng.below(15);
        std::vector<double> a(na), b(nb);
        // coarse values force plenty of ties
        for (auto& v : a) v = static_cast<double>(rng.below(6));
        for (auto& v : b) v = static_cast<double>(rng.below(6));
        const double mine = cliffs_delta(a, b).delta;
        const double brute = oracles::cliffs_delta_brute(a, b);
        CHECK(mine == doctest::Approx(brute).epsilon(1e-12));
        CHECK(cliffs_delta(b, a).delta == doctest::Approx(-mine).epsilon(1e-12));
        CHECK(std::fabs(mine) <= 1.0);
    }
}

TEST_CASE("scott-knott: examples") {
    // identical distributions share one rank
    std::map<std::string, std::vector<double>> same = {
        {"a", {5, 5, 5}}, {"b", {5, 5, 5}}, {"c", {5, 5, 5}}};
    auto table = scott_knott(same, true);
    for (const auto& e : table.entries) CHECK(e.rank == 1);

    // clearly separated groups split
    std::map<std::string, std::vector<double>> apart = {{"low", {1, 1, 1}},
                                                        {"high", {100, 100, 100}}};
    table = scott_knott(apart, true);
    CHECK(table.rank_of("low") == 1);
    CHECK(table.rank_of("high") == 2);
    table = scott_knott(apart, false);
    CHECK(table.rank_of("high") == 1);
    CHECK(table.rank_of("low") == 2);

    // one group
    std::map<std::string, std::vector<double>> solo = {{"only", {3, 4}}};
    CHECK(scott_knott(solo, true).rank_of("only") == 1);

    CHECK_THROWS_AS(scott_knott({}, true), InputError);
    CHECK_THROWS_AS(scott_knott({{"x", {1.0}}}, true), InputError);
}

TEST_CASE("scott-knott: split position maximizes the objective") {
    // exhaustive split check on the two-group example: single position, E > 0
    std::vector<std::vector<double>> obs = {{1, 1, 1}, {100, 100, 100}};
    CHECK(scott_knott_split_value(obs, 1) > 0);

    Rng rng(107);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t m = 2 + rng.below(5);
        std::vector<std::vector<double>> groups(m);
        for (auto& g : groups) {
            const size_t k = 2 + rng.below(6);
            const double center = rng.uniform01() * 10;
            for (size_t i = 0; i < k; ++i) g.push_back(center + rng.uniform01());
        }
        for (size_t j = 1; j < m; ++j) {
            CHECK(scott_knott_split_value(groups, j) ==
                  doctest::Approx(oracles::sk_split_objective(groups, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: scott-knott agrees with an independent reimplementation") {
    Rng rng(109);
    for (int trial = 0; trial < 100; ++trial) {
        std::map<std::string, std::vector<double>> groups;
        const size_t m = 1 + rng.below(6);
        for (size_t g = 0; g < m; ++g) {
            std::vector<double> obs;
            const double center = static_cast<double>(rng.below(4)) * 2.0;
            const size_t k = 2 + rng.below(8);
            for (size_t i = 0; i < k; ++i) obs.push_back(center + rng.uniform01());
            groups["t" + std::to_string(g)] = std::move(obs);
        }
        const bool smaller = rng.uniform01() < 0.5;
        const auto mine = scott_knott(groups, smaller);
        const auto ref = oracles::scott_knott_oracle(groups, smaller);
        for (const auto& e : mine.entries) {
            CHECK(e.rank == ref.at(e.name));
        }
        // ranks are contiguous from 1
        int max_rank = 0;
        for (const auto& e : mine.entries) max_rank = std::max(max_rank, e.rank);
        std::vector<bool> seen(static_cast<size_t>(max_rank) + 1, false);
        for (const auto& e : mine.entries) {
            CHECK(e.rank >= 1);
            seen[static_cast<size_t>(e.rank)] = true;
        }
        for (int r = 1; r <= max_rank; ++r) CHECK(seen[static_cast<size_t>(r)]);
    }
}

TEST_CASE("property: rank-label invariance under renaming") {
    std::map<std::string, std::vector<double>> groups = {
        {"alpha", {1, 2, 1, 2}}, {"beta", {10, 11, 12, 10}}, {"gamma", {10.5, 11.5, 10.2, 11}}};
    const auto before = scott_knott(groups, true);
    std::map<std::string, std::vector<double>> renamed = {{"x_alpha", groups["alpha"]},
                                                          {"y_beta", groups["beta"]},
                                                          {"z_gamma", groups["gamma"]}};
    const auto after = scott_knott(renamed, true);
    CHECK(before.rank_of("alpha") == after.rank_of("x_alpha"));
    CHECK(before.rank_of("beta") == after.rank_of("y_beta"));
    CHECK(before.rank_of("gamma") == after.rank_of("z_gamma"));
}
