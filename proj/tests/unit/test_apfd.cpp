#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "tcprank/apfd.hpp"
#include "tcprank/errors.hpp"
#include "tcprank/rng.hpp"

using namespace tcprank;

namespace {

std::vector<int> random_permutation(int n, Rng& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    return order;
}

std::vector<int> random_failed_set(int n, int l, Rng& rng) {
    auto picks = rng.sample_without_replacement(n, l);
    return std::vector<int>(picks.begin(), picks.end());
}

}  // namespace

TEST_CASE("apfd direct substitution: n=2, single failure placed first") {
    // 1 - 1/2 + 1/4
    CHECK(apfd(std::vector<int>{0, 1}, {0}, 2).value == 0.75);
}

TEST_CASE("apfd when every test fails is exactly 0.5") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(12));
        std::vector<int> failed(n);
        std::iota(failed.begin(), failed.end(), 0);
        const auto order = random_permutation(n, rng);
        CHECK(apfd(order, failed, n).value == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("apfd matches the first-principles oracle bitwise") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(9));
        const int l = 1 + static_cast<int>(rng.below(n));
        const auto order = random_permutation(n, rng);
        const auto failed = random_failed_set(n, l, rng);
        CHECK(apfd(order, failed, n).value == oracles::apfd(order, failed));
    }
}

TEST_CASE("apfd errors") {
    CHECK_THROWS_AS(apfd(std::vector<int>{0, 1}, {}, 2), NoFailuresError);
    CHECK_THROWS_AS(apfd(std::vector<int>{0, 0}, {0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(apfd(std::vector<int>{0, 2}, {0}, 2), std::invalid_argument);
}

TEST_CASE("apfd ignores how passing tests are permuted among themselves") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4 + static_cast<int>(rng.below(8));
        const int l = 1 + static_cast<int>(rng.below(n / 2));
        const auto failed = random_failed_set(n, l, rng);
        auto order = random_permutation(n, rng);
        const double before = apfd(order, failed, n).value;

        // swap two passing tests in place
        std::vector<int> passing_positions;
        for (int k = 0; k < n; ++k) {
            bool fails = std::find(failed.begin(), failed.end(), order[k]) != failed.end();
            if (!fails) passing_positions.push_back(k);
        }
        if (passing_positions.size() < 2) continue;
        const int a = passing_positions[rng.below(passing_positions.size())];
        const int b = passing_positions[rng.below(passing_positions.size())];
        std::swap(order[a], order[b]);
        CHECK(apfd(order, failed, n).value == before);
    }
}

TEST_CASE("moving a failed test strictly earlier strictly increases apfd") {
    Rng rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(9));
        const int l = 1 + static_cast<int>(rng.below(n - 1));
        const auto failed = random_failed_set(n, l, rng);
        auto order = random_permutation(n, rng);
        // find a failed test not already first and a strictly earlier slot
        int pos = -1;
        for (int k = n - 1; k > 0; --k) {
            if (std::find(failed.begin(), failed.end(), order[k]) != failed.end()) {
                pos = k;
                break;
            }
        }
        if (pos <= 0) continue;
        const double before = apfd(order, failed, n).value;
        const int target = static_cast<int>(rng.below(pos));
        // move order[pos] to position target, shifting the middle right;
        // other failed tests in between move later, so re-check only when the
        // displaced span contains no failed test
        bool span_clean = true;
        for (int k = target; k < pos; ++k) {
            if (std::find(failed.begin(), failed.end(), order[k]) != failed.end()) {
                span_clean = false;
                break;
            }
        }
        if (!span_clean) continue;
        const int moved = order[pos];
        order.erase(order.begin() + pos);
        order.insert(order.begin() + target, moved);
        CHECK(apfd(order, failed, n).value > before);
    }
}

TEST_CASE("reversal identity for single-failure suites") {
    // reversing the order maps the failure's position p to n+1-p; by the
    // oracle the identity works out to apfd(reversed) = 1 - apfd(original)
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(10));
        const auto failed = random_failed_set(n, 1, rng);
        auto order = random_permutation(n, rng);
        const double fwd = oracles::apfd(order, failed);
        std::reverse(order.begin(), order.end());
        const double rev = apfd(order, failed, n).value;
        CHECK(rev == doctest::Approx(1.0 - fwd).epsilon(1e-12));
    }
}

TEST_CASE("improvement examples") {
    PairedComparison one{{{1, 0.5, 0.55}}};
    CHECK(improvement(one) == doctest::Approx(0.10).epsilon(1e-12));

    PairedComparison same{{{1, 0.4, 0.4}, {2, 0.7, 0.7}}};
    CHECK(improvement(same) == 0.0);

    CHECK_THROWS_AS(improvement(PairedComparison{}), EmptyInputError);
}
