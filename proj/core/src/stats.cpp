#include "fairpsm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairpsm/errors.hpp"

namespace fairpsm {

SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.n = values.size();
    if (s.n == 0) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - s.mean;
            ss += d * d;
        }
        s.variance = ss / static_cast<double>(s.n - 1);
    }
    return s;
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 500;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InputError("incomplete beta: a,b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw InputError("student_t_cdf: df must be positive");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x); // P(T > |t|)
    return t >= 0.0 ? 1.0 - tail : tail;
}

WelchResult welch_from_summary(const SampleSummary& a, const SampleSummary& b) {
    if (a.n < 2 || b.n < 2) throw InputError("welch_ttest: samples need at least 2 values");

    WelchResult r;
    const double va_n = a.variance / static_cast<double>(a.n);
    const double vb_n = b.variance / static_cast<double>(b.n);
    const double se2 = va_n + vb_n;
    if (se2 <= 0.0) {
        // both samples constant
        if (a.mean == b.mean) {
            r.t = 0.0;
            r.df = static_cast<double>(a.n + b.n - 2);
            r.p = 1.0;
        } else {
            r.t = a.mean > b.mean ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            r.df = static_cast<double>(a.n + b.n - 2);
            r.p = 0.0;
        }
        return r;
    }
    r.t = (a.mean - b.mean) / std::sqrt(se2);
    r.df = se2 * se2 /
           (va_n * va_n / static_cast<double>(a.n - 1) + vb_n * vb_n / static_cast<double>(b.n - 1));
    // two-sided: P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    r.p = regularized_incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
    return r;
}

WelchResult welch_ttest(std::span<const double> a, std::span<const double> b) {
    for (double v : a) {
        if (!std::isfinite(v)) throw InputError("welch_ttest: non-finite value");
    }
    for (double v : b) {
        if (!std::isfinite(v)) throw InputError("welch_ttest: non-finite value");
    }
    return welch_from_summary(summarize(a), summarize(b));
}

EffectSize cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InputError("cliffs_delta: empty sample");
    // sort one side; count via binary search instead of the O(nm) loop
    std::vector<double> sorted_b(b.begin(), b.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    long long greater = 0, less = 0;
    for (double x : a) {
        const auto lo = std::lower_bound(sorted_b.begin(), sorted_b.end(), x);
        const auto hi = std::upper_bound(lo, sorted_b.end(), x);
        greater += lo - sorted_b.begin();             // b_j < x
        less += sorted_b.end() - hi;                  // b_j > x
    }
    EffectSize e;
    e.delta = static_cast<double>(greater - less) /
              (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    e.negligible = std::fabs(e.delta) < kCliffsNegligible;
    return e;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InputError("median: empty input");
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double scott_knott_split_value(const std::vector<std::vector<double>>& ordered_obs, size_t j) {
    // E(delta) = |l1|/|l| abs(E(l1)-E(l))^2 + |l2|/|l| abs(E(l2)-E(l))^2,
    // written as in the source even though abs is redundant under the square
    double sum1 = 0, sum2 = 0;
    size_t n1 = 0, n2 = 0;
    for (size_t g = 0; g < ordered_obs.size(); ++g) {
        const double s = std::accumulate(ordered_obs[g].begin(), ordered_obs[g].end(), 0.0);
        if (g < j) {
            sum1 += s;
            n1 += ordered_obs[g].size();
        } else {
            sum2 += s;
            n2 += ordered_obs[g].size();
        }
    }
    const double n = static_cast<double>(n1 + n2);
    const double mean_all = (sum1 + sum2) / n;
    const double mean1 = sum1 / static_cast<double>(n1);
    const double mean2 = sum2 / static_cast<double>(n2);
    const double d1 = std::fabs(mean1 - mean_all);
    const double d2 = std::fabs(mean2 - mean_all);
    return (static_cast<double>(n1) / n) * d1 * d1 + (static_cast<double>(n2) / n) * d2 * d2;
}

namespace {

struct SkGroup {
    std::string name;
    std::vector<double> obs;
    double med;
};

void sk_cluster(const std::vector<SkGroup>& ordered, size_t lo, size_t hi,
                std::vector<std::pair<size_t, size_t>>& clusters) {
    const size_t m = hi - lo;
    if (m <= 1) {
        clusters.emplace_back(lo, hi);
        return;
    }
    std::vector<std::vector<double>> obs;
    obs.reserve(m);
    for (size_t g = lo; g < hi; ++g) obs.push_back(ordered[g].obs);

    size_t best_j = 1;
    double best_v = -1.0;
    for (size_t j = 1; j < m; ++j) {
        const double v = scott_knott_split_value(obs, j);
        if (v > best_v) { // ties -> leftmost
            best_v = v;
            best_j = j;
        }
    }

    std::vector<double> pool1, pool2;
    for (size_t g = 0; g < m; ++g) {
        auto& dst = g < best_j ? pool1 : pool2;
        dst.insert(dst.end(), obs[g].begin(), obs[g].end());
    }
    const EffectSize gate = cliffs_delta(pool1, pool2);
    if (gate.negligible) {
        clusters.emplace_back(lo, hi); // merged leaf
        return;
    }
    sk_cluster(ordered, lo, lo + best_j, clusters);
    sk_cluster(ordered, lo + best_j, hi, clusters);
}

} // namespace

RankTable scott_knott(const std::map<std::string, std::vector<double>>& groups,
                      bool smaller_is_better) {
    if (groups.empty()) throw InputError("scott_knott: no groups");
    std::vector<SkGroup> ordered;
    ordered.reserve(groups.size());
    for (const auto& [name, obs] : groups) {
        if (obs.size() < 2) {
            throw InputError("scott_knott: group \"" + name + "\" needs at least 2 observations");
        }
        ordered.push_back({name, obs, median(obs)});
    }
    // ascending by median, stable by name (map iteration is already by name)
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const SkGroup& a, const SkGroup& b) { return a.med < b.med; });

    std::vector<std::pair<size_t, size_t>> clusters;
    sk_cluster(ordered, 0, ordered.size(), clusters);

    RankTable table;
    table.smaller_is_better = smaller_is_better;
    const int k = static_cast<int>(clusters.size());
    for (size_t c = 0; c < clusters.size(); ++c) {
        // leftmost cluster holds the smallest medians
        const int rank = smaller_is_better ? static_cast<int>(c) + 1 : k - static_cast<int>(c);
        for (size_t g = clusters[c].first; g < clusters[c].second; ++g) {
            table.entries.push_back({ordered[g].name, ordered[g].med, rank});
        }
    }
    std::stable_sort(table.entries.begin(), table.entries.end(),
                     [](const RankEntry& a, const RankEntry& b) {
                         if (a.rank != b.rank) return a.rank < b.rank;
                         return a.name < b.name;
                     });
    return table;
}

int RankTable::rank_of(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return e.rank;
    }
    throw InputError("rank table has no treatment \"" + name + "\"");
}

} // namespace fairpsm
