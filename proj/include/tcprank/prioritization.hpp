#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcprank/types.hpp"

namespace tcprank {

enum class Strategy { random, total, additional, mod_total, mod_additional };

std::string to_string(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);
bool is_modified(Strategy s);
// total for mod_total, additional for mod_additional.
std::optional<Strategy> traditional_counterpart(Strategy s);

struct UnitProbabilities {
    std::vector<double> probs;  // per-unit fault probability, each in [0,1]
};

UnitProbabilities uniform_probabilities(int m);

// Prob(F_j) = p0 + (1-p0) * pdp[j], elementwise. p0 = 1 gives constant
// weights (coverage-only behavior); p0 = 0 passes pdp through unchanged.
UnitProbabilities combine_probability(std::span<const double> pdp, double p0);

// Weighted coverage of one test: sum_j cover_row[j] * probs[j]. With all
// probabilities 1 this is the plain total coverage.
double fault_based_cover(std::span<const double> cover_row, const UnitProbabilities& probs);

struct PrioritizationResult {
    std::vector<int> order;  // permutation of 0..n-1
    Strategy strategy = Strategy::total;
    std::optional<double> p0;
    std::optional<std::uint64_t> seed;
};

// Uniformly random permutation from the seeded generator.
PrioritizationResult prioritize_random(int n, std::uint64_t seed);

// Stable descending sort by fault-based coverage; ties keep suite order.
PrioritizationResult prioritize_total(const CoverageMatrix& cover, const UnitProbabilities& probs);

// What to do once every unit's residual probability reached zero:
//   clip  - keep residuals at zero; remaining tests fall out by descending
//           total weighted coverage, then suite order (the normative variant)
//   reset - restore residuals to the initial probabilities and continue
//           greedily among the remaining tests
enum class ExhaustedPolicy { clip, reset };

// Greedy strategy: repeatedly pick the test with the highest coverage of
// still-uncovered probability mass. Residuals update as
// residual[j] = max(residual[j] - cover[k][j], 0) after each pick. Ties on
// the greedy score break toward larger total weighted coverage, then toward
// the earlier suite position. Scores within kScoreTolerance compare equal.
PrioritizationResult prioritize_additional(const CoverageMatrix& cover,
                                           const UnitProbabilities& probs,
                                           ExhaustedPolicy policy = ExhaustedPolicy::clip);

inline constexpr double kScoreTolerance = 1e-12;

}  // namespace tcprank
