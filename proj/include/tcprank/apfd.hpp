#pragma once

#include <span>
#include <vector>

namespace tcprank {

struct ApfdScore {
    double value = 0.0;  // in (0, 1)
};

// APFD of a prioritized order: 1 - (sum of 1-based positions of the failing
// tests) / (n*l) + 1/(2n).
//   order:  permutation of 0..n-1; order[k] is the test run at position k+1
//   failed: distinct indices of failing tests, l = failed.size() >= 1
// Throws NoFailuresError when failed is empty and std::invalid_argument when
// order is not a permutation of 0..n-1.
ApfdScore apfd(std::span<const int> order, const std::vector<int>& failed, int n);

struct PairedComparison {
    struct Entry {
        int version_id;
        double apfd_traditional;
        double apfd_modified;
    };
    std::vector<Entry> per_version;
};

// Mean of (modified - traditional) / traditional over versions. May be
// negative. Throws EmptyInputError on an empty comparison.
double improvement(const PairedComparison& pairs);

struct WilcoxonResult {
    double statistic;   // min(W+, W-) over non-zero differences
    double p_value;     // two-sided, in [0, 1]
    int n_nonzero;      // differences remaining after dropping zeros
    bool exact;         // exact distribution (true) or normal approximation
};

// Two-sided Wilcoxon signed-rank test of modified vs traditional APFD.
// Zero differences are dropped, tied |d| get averaged ranks. The null
// distribution is exact (by dynamic programming over rank sums) for up to
// 25 non-zero pairs and a normal approximation with continuity and tie
// corrections above that. Throws TooFewSamplesError below 5 non-zero pairs.
WilcoxonResult wilcoxon_signed_rank(const PairedComparison& pairs);

// Crossover size between the exact and approximate branches.
inline constexpr int kWilcoxonExactLimit = 25;

namespace detail {

// The two p-value branches, taking already-filtered non-zero differences.
// Exposed so the crossover agreement property can compare them on one sample.
double wilcoxon_exact_p(const std::vector<double>& nonzero_diffs);
double wilcoxon_approx_p(const std::vector<double>& nonzero_diffs);

}  // namespace detail

}  // namespace tcprank
