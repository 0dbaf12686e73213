#include "tcprank/apfd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcprank/errors.hpp"

namespace tcprank {

ApfdScore apfd(std::span<const int> order, const std::vector<int>& failed, int n) {
    if (n < 1 || static_cast<int>(order.size()) != n) {
        throw std::invalid_argument("apfd: order size does not match n");
    }
    // position[t] = 1-based position of test t in the order
    std::vector<int> position(n, 0);
    for (int k = 0; k < n; ++k) {
        const int t = order[k];
        if (t < 0 || t >= n || position[t] != 0) {
            throw std::invalid_argument("apfd: order is not a permutation of 0..n-1");
        }
        position[t] = k + 1;
    }
    if (failed.empty()) {
        throw NoFailuresError("apfd: undefined when no test fails");
    }
    double sum_positions = 0.0;
    for (int t : failed) {
        if (t < 0 || t >= n) {
            throw std::invalid_argument("apfd: failed test index out of range");
        }
        sum_positions += position[t];
    }
    const double l = static_cast<double>(failed.size());
    return {1.0 - sum_positions / (static_cast<double>(n) * l) + 1.0 / (2.0 * static_cast<double>(n))};
}

double improvement(const PairedComparison& pairs) {
    if (pairs.per_version.empty()) {
        throw EmptyInputError("improvement: no version pairs");
    }
    double sum = 0.0;
    for (const auto& e : pairs.per_version) {
        sum += (e.apfd_modified - e.apfd_traditional) / e.apfd_traditional;
    }
    return sum / static_cast<double>(pairs.per_version.size());
}

namespace {

// Average ranks of |d|, ascending, ties averaged.
std::vector<double> average_ranks(const std::vector<double>& absd) {
    const std::size_t k = absd.size();
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return absd[a] < absd[b]; });
    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && absd[idx[j + 1]] == absd[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double w_plus_of(const std::vector<double>& d, const std::vector<double>& ranks) {
    double w = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > 0.0) w += ranks[i];
    }
    return w;
}

}  // namespace

namespace detail {

double wilcoxon_exact_p(const std::vector<double>& d) {
    const int k = static_cast<int>(d.size());
    std::vector<double> absd(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) absd[i] = std::fabs(d[i]);
    const std::vector<double> ranks = average_ranks(absd);
    const double w_plus = w_plus_of(d, ranks);

    // Doubled ranks are integers even with tie averaging; count subsets by
    // achievable doubled rank sum.
    std::vector<int> r2(d.size());
    int total2 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        r2[i] = static_cast<int>(std::llround(2.0 * ranks[i]));
        total2 += r2[i];
    }
    std::vector<double> count(total2 + 1, 0.0);
    count[0] = 1.0;
    for (int r : r2) {
        for (int s = total2; s >= r; --s) count[s] += count[s - r];
    }
    const double denom = std::ldexp(1.0, k);  // 2^k
    const int w2 = static_cast<int>(std::llround(2.0 * w_plus));
    double p_le = 0.0, p_ge = 0.0;
    for (int s = 0; s <= total2; ++s) {
        if (s <= w2) p_le += count[s];
        if (s >= w2) p_ge += count[s];
    }
    const double p = 2.0 * std::min(p_le, p_ge) / denom;
    return std::min(1.0, std::max(0.0, p));
}

double wilcoxon_approx_p(const std::vector<double>& d) {
    const double kk = static_cast<double>(d.size());
    std::vector<double> absd(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) absd[i] = std::fabs(d[i]);
    const std::vector<double> ranks = average_ranks(absd);
    const double w_plus = w_plus_of(d, ranks);

    const double mu = kk * (kk + 1.0) / 4.0;
    // variance with tie correction: sum over tie groups of (t^3 - t)/48
    double tie_term = 0.0;
    std::vector<double> sorted_ranks = ranks;
    std::sort(sorted_ranks.begin(), sorted_ranks.end());
    std::size_t i = 0;
    while (i < sorted_ranks.size()) {
        std::size_t j = i;
        while (j + 1 < sorted_ranks.size() && sorted_ranks[j + 1] == sorted_ranks[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += (t * t * t - t) / 48.0;
        i = j + 1;
    }
    const double var = kk * (kk + 1.0) * (2.0 * kk + 1.0) / 24.0 - tie_term;
    if (w_plus == mu || var <= 0.0) return 1.0;
    const double cc = w_plus > mu ? 0.5 : -0.5;  // continuity correction toward the mean
    const double z = (w_plus - mu - cc) / std::sqrt(var);
    const double p = 2.0 * (1.0 - normal_cdf(std::fabs(z)));
    return std::min(1.0, std::max(0.0, p));
}

}  // namespace detail

WilcoxonResult wilcoxon_signed_rank(const PairedComparison& pairs) {
    std::vector<double> d;
    for (const auto& e : pairs.per_version) {
        const double diff = e.apfd_modified - e.apfd_traditional;
        if (diff != 0.0) d.push_back(diff);
    }
    const int k = static_cast<int>(d.size());
    if (k < 5) {
        throw TooFewSamplesError("wilcoxon_signed_rank: needs >= 5 non-zero differences, got " +
                                 std::to_string(k));
    }
    std::vector<double> absd(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) absd[i] = std::fabs(d[i]);
    const std::vector<double> ranks = average_ranks(absd);
    const double w_plus = w_plus_of(d, ranks);
    double w_minus = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0) w_minus += ranks[i];
    }
    const double statistic = std::min(w_plus, w_minus);
    const bool exact = k <= kWilcoxonExactLimit;
    const double p = exact ? detail::wilcoxon_exact_p(d) : detail::wilcoxon_approx_p(d);
    return {statistic, p, k, exact};
}

}  // namespace tcprank
