#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace fairpsm {

struct SampleSummary {
    size_t n = 0;
    double mean = 0.0;
    double variance = 0.0; // sample variance (n-1 denominator)
};

SampleSummary summarize(std::span<const double> values);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0; // two-sided
};

// Welch two-sample t-test with Satterthwaite degrees of freedom. Degenerate
// conventions: both variances zero -> p = 1 when means are equal, p = 0
// otherwise.
WelchResult welch_ttest(std::span<const double> a, std::span<const double> b);
WelchResult welch_from_summary(const SampleSummary& a, const SampleSummary& b);

// P(T <= t) for Student's t with df degrees of freedom, through the
// regularized incomplete beta function (absolute error well under 1e-10).
double student_t_cdf(double t, double df);
double regularized_incomplete_beta(double a, double b, double x);

struct EffectSize {
    double delta = 0.0; // in [-1, 1]
    bool negligible = true; // |delta| < 0.147
};

// delta = (#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)
EffectSize cliffs_delta(std::span<const double> a, std::span<const double> b);

inline constexpr double kCliffsNegligible = 0.147;

struct RankEntry {
    std::string name;
    double median = 0.0;
    int rank = 0; // 1 = best
};

struct RankTable {
    std::vector<RankEntry> entries; // sorted best rank first, stable by name
    bool smaller_is_better = true;

    int rank_of(const std::string& name) const;
};

// Scott-Knott: sort treatments by median, recursively split where the
// expected difference E(delta) of group means is maximal, keep a split only
// when the two sides differ by a non-negligible Cliff's delta, and share one
// rank inside every merged leaf.
RankTable scott_knott(const std::map<std::string, std::vector<double>>& groups,
                      bool smaller_is_better);

// Split objective exposed for the exhaustive-argmax oracle in the tests:
// position j splits the ordered treatment list after the j-th treatment.
double scott_knott_split_value(const std::vector<std::vector<double>>& ordered_obs, size_t j);

double median(std::vector<double> values);

} // namespace fairpsm
