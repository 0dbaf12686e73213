#include "tcprank/prioritization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcprank/errors.hpp"
#include "tcprank/rng.hpp"

namespace tcprank {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::total: return "total";
        case Strategy::additional: return "additional";
        case Strategy::mod_total: return "mod_total";
        case Strategy::mod_additional: return "mod_additional";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
    if (name == "random") return Strategy::random;
    if (name == "total") return Strategy::total;
    if (name == "additional") return Strategy::additional;
    if (name == "mod_total") return Strategy::mod_total;
    if (name == "mod_additional") return Strategy::mod_additional;
    return std::nullopt;
}

bool is_modified(Strategy s) {
    return s == Strategy::mod_total || s == Strategy::mod_additional;
}

std::optional<Strategy> traditional_counterpart(Strategy s) {
    if (s == Strategy::mod_total) return Strategy::total;
    if (s == Strategy::mod_additional) return Strategy::additional;
    return std::nullopt;
}

UnitProbabilities uniform_probabilities(int m) {
    return {std::vector<double>(m, 1.0)};
}

UnitProbabilities combine_probability(std::span<const double> pdp, double p0) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) {
        throw RangeError("combine_probability: p0 " + std::to_string(p0) + " outside [0,1]");
    }
    UnitProbabilities out;
    out.probs.reserve(pdp.size());
    for (double v : pdp) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw RangeError("combine_probability: fault-proneness " + std::to_string(v) +
                             " outside [0,1]");
        }
        out.probs.push_back(p0 + (1.0 - p0) * v);
    }
    return out;
}

double fault_based_cover(std::span<const double> cover_row, const UnitProbabilities& probs) {
    if (cover_row.size() != probs.probs.size()) {
        throw DimensionError("fault_based_cover: row length " + std::to_string(cover_row.size()) +
                             " != probability length " + std::to_string(probs.probs.size()));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < cover_row.size(); ++j) s += cover_row[j] * probs.probs[j];
    return s;
}

namespace {

double weighted_row(const CoverageMatrix& cover, int row, const std::vector<double>& weights) {
    double s = 0.0;
    for (const auto& e : cover.row(row)) s += e.fraction * weights[e.col];
    return s;
}

void check_dims(const CoverageMatrix& cover, const UnitProbabilities& probs) {
    if (static_cast<std::size_t>(cover.n_cols()) != probs.probs.size()) {
        throw DimensionError("prioritize: matrix has " + std::to_string(cover.n_cols()) +
                             " units but " + std::to_string(probs.probs.size()) +
                             " probabilities were given");
    }
}

}  // namespace

PrioritizationResult prioritize_random(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    return {std::move(order), Strategy::random, std::nullopt, seed};
}

PrioritizationResult prioritize_total(const CoverageMatrix& cover, const UnitProbabilities& probs) {
    check_dims(cover, probs);
    const int n = cover.n_rows();
    std::vector<double> score(n);
    for (int i = 0; i < n; ++i) score[i] = weighted_row(cover, i, probs.probs);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    return {std::move(order), Strategy::total, std::nullopt, std::nullopt};
}

PrioritizationResult prioritize_additional(const CoverageMatrix& cover,
                                           const UnitProbabilities& probs,
                                           ExhaustedPolicy policy) {
    check_dims(cover, probs);
    const int n = cover.n_rows();
    std::vector<double> total(n);
    for (int i = 0; i < n; ++i) total[i] = weighted_row(cover, i, probs.probs);

    std::vector<double> residual = probs.probs;
    std::vector<char> selected(n, 0);
    std::vector<int> order;
    order.reserve(n);

    for (int step = 0; step < n; ++step) {
        // incumbent: first unselected test in suite order
        int k = 0;
        while (selected[k]) ++k;
        double sum = weighted_row(cover, k, residual);
        for (int l = k + 1; l < n; ++l) {
            if (selected[l]) continue;
            const double s = weighted_row(cover, l, residual);
            // challenger wins on a strictly better score, or on a tied score
            // with strictly larger total weighted coverage
            if (s > sum + kScoreTolerance ||
                (std::fabs(s - sum) <= kScoreTolerance && total[l] > total[k])) {
                sum = s;
                k = l;
            }
        }
        order.push_back(k);
        selected[k] = 1;
        bool all_zero = true;
        for (const auto& e : cover.row(k)) {
            residual[e.col] = std::max(residual[e.col] - e.fraction, 0.0);
        }
        if (policy == ExhaustedPolicy::reset && step + 1 < n) {
            for (double r : residual) {
                if (r != 0.0) {
                    all_zero = false;
                    break;
                }
            }
            if (all_zero) residual = probs.probs;
        }
    }
    return {std::move(order), Strategy::additional, std::nullopt, std::nullopt};
}

}  // namespace tcprank
