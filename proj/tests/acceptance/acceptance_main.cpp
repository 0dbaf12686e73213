// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tcprank/apfd.hpp"
#include "tcprank/csv.hpp"
#include "tcprank/dataset.hpp"
#include "tcprank/defect_model.hpp"
#include "tcprank/harness.hpp"
#include "tcprank/prioritization.hpp"
#include "tcprank/rng.hpp"
#include "tcprank/synthetic.hpp"
#include "unit/oracles.hpp"
#include "unit/test_support.hpp"

namespace fs = std::filesystem;
using namespace tcprank;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %d: %s (%s) [%.2fs]\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

void run(int number, const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    const auto start = Clock::now();
    bool ok = false;
    std::string detail;
    try {
        auto [o, d] = body();
        ok = o;
        detail = d;
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(number, name, ok, detail, secs);
}

std::vector<std::vector<double>> random_dense(int n, int m, Rng& rng, double density,
                                              bool fractional) {
    std::vector<std::vector<double>> d(n, std::vector<double>(m, 0.0));
    for (auto& row : d) {
        for (auto& v : row) {
            if (rng.uniform01() < density) v = fractional ? rng.uniform01() : 1.0;
        }
    }
    return d;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// --- criterion bodies -------------------------------------------------------

std::pair<bool, std::string> apfd_oracle_equivalence() {
    Rng rng(101);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(9));  // n <= 10
        const int l = 1 + static_cast<int>(rng.below(n));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        auto picks = rng.sample_without_replacement(n, l);
        const std::vector<int> failed(picks.begin(), picks.end());
        const double got = apfd(order, failed, n).value;
        const double want = oracles::apfd(order, failed);
        if (got != want) ++mismatches;  // bitwise comparison
    }
    return {mismatches == 0, "1000 instances, " + std::to_string(mismatches) + " bitwise mismatches"};
}

std::pair<bool, std::string> all_failures_identity() {
    Rng rng(102);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(30));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::vector<int> failed(n);
        std::iota(failed.begin(), failed.end(), 0);
        worst = std::max(worst, std::fabs(apfd(order, failed, n).value - 0.5));
    }
    return {worst <= 1e-12, "max |APFD - 0.5| = " + fmt(worst)};
}

std::pair<bool, std::string> traditional_degeneracy() {
    Rng rng(103);
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(19));   // n <= 20
        const int m = 2 + static_cast<int>(rng.below(29));   // m <= 30
        const bool fractional = trial % 3 != 0;
        const auto dense = random_dense(n, m, rng, 0.4, fractional);
        const auto cover = CoverageMatrix::from_dense(dense);
        const auto ones = uniform_probabilities(m);
        if (prioritize_total(cover, ones).order != oracles::total(dense)) ++mismatches;
        if (prioritize_additional(cover, ones).order != oracles::additional(dense)) ++mismatches;
    }
    return {mismatches == 0, "500 matrices, " + std::to_string(mismatches) + " order mismatches"};
}

std::pair<bool, std::string> p0_degeneracy() {
    GenSpec spec;
    spec.versions = 10;
    spec.tests_per_version = 25;
    spec.units_per_version = 50;
    spec.classes = 10;
    spec.coverage_density = 0.08;
    spec.fault_rate = 0.15;
    spec.signal_strength = 2.0;
    spec.failure_link = 0.8;
    spec.seed = 104;
    const fs::path dataset = fs::temp_directory_path() / "tcprank_acc_p0";
    fs::remove_all(dataset);
    generate(spec, dataset);

    ExperimentConfig cfg;
    cfg.dataset_path = dataset;
    cfg.seed = 42;
    cfg.p0_sweep = {0.0, 1.0};
    cfg.measure_runtimes = false;
    cfg.train_config.iterations = 5;
    const auto rep = run_experiment(cfg);

    std::map<std::pair<int, Strategy>, double> trad;
    for (const auto& row : rep.rows) {
        if (!row.p0) trad[{row.version_id, row.strategy}] = row.apfd;
    }
    int checked = 0, mismatches = 0, at_zero = 0;
    for (const auto& row : rep.rows) {
        if (row.p0 && *row.p0 == 1.0) {
            const Strategy counterpart = *traditional_counterpart(row.strategy);
            ++checked;
            if (row.apfd != trad.at({row.version_id, counterpart})) ++mismatches;
        }
        if (row.p0 && *row.p0 == 0.0) ++at_zero;
    }

    // Eq. 5 reduction: the combiner at p0 = 0 passes raw scores through bitwise
    Rng rng(105);
    bool passthrough = true;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> pdp(40);
        for (auto& v : pdp) v = rng.uniform01();
        if (combine_probability(pdp, 0.0).probs != pdp) passthrough = false;
    }
    const bool ok = checked > 0 && mismatches == 0 && at_zero > 0 && passthrough;
    return {ok, std::to_string(checked) + " p0=1 rows bit-identical to traditional, p0=0 weights = raw scores: " +
                    (passthrough ? "yes" : "NO")};
}

std::pair<bool, std::string> defect_predictor_soundness() {
    const auto ts = testsupport::make_toy_training_set(1);
    TrainConfig cfg;  // defaults: 20 iterations, 5 epochs, lr 0.01
    cfg.seed = 1;
    const DefectModel model = train(ts, cfg);
    const double f1 = hard_f1(model, ts);

    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        worst = std::max(worst, testsupport::gradcheck_relative_error(seed));
    }
    const bool ok = f1 >= 0.95 && worst < 1e-4;
    return {ok, "toy F1 = " + fmt(f1) + " (needs >= 0.95), worst gradcheck rel err = " + fmt(worst)};
}

struct SignalRun {
    double mean_trad = 0.0;
    double mean_mod = 0.0;
    double impr = 0.0;
    double p_value = 1.0;
    int pairs = 0;
};

SignalRun end_to_end_run(double signal) {
    PairedComparison pooled;
    double sum_trad = 0.0, sum_mod = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        GenSpec spec;
        spec.versions = 20;
        spec.tests_per_version = 60;
        spec.units_per_version = 120;
        spec.classes = 30;
        spec.coverage_density = 2.0 / 120.0;
        spec.fault_rate = 0.15;
        spec.signal_strength = signal;
        spec.failure_link = 0.8;
        spec.seed = 1000 + seed;
        spec.project_name = "synth" + std::to_string(seed);
        const fs::path dataset =
            fs::temp_directory_path() / ("tcprank_acc_e2e_" + std::to_string(seed) + "_" + fmt(signal));
        fs::remove_all(dataset);
        generate(spec, dataset);

        ExperimentConfig cfg;
        cfg.dataset_path = dataset;
        cfg.seed = 7;
        cfg.p0 = 0.3;
        cfg.strategies = {Strategy::additional, Strategy::mod_additional};
        cfg.measure_runtimes = false;
        cfg.workers = 2;
        cfg.train_config.iterations = 20;
        cfg.train_config.epochs_per_iteration = 25;
        cfg.train_config.learning_rate = 0.02;
        const auto rep = run_experiment(cfg);

        std::map<int, double> trad;
        for (const auto& row : rep.rows) {
            if (row.strategy == Strategy::additional) trad[row.version_id] = row.apfd;
        }
        for (const auto& row : rep.rows) {
            if (row.strategy != Strategy::mod_additional) continue;
            const double t = trad.at(row.version_id);
            pooled.per_version.push_back({row.version_id, t, row.apfd});
            sum_trad += t;
            sum_mod += row.apfd;
        }
        fs::remove_all(dataset);
    }
    SignalRun out;
    out.pairs = static_cast<int>(pooled.per_version.size());
    out.mean_trad = sum_trad / out.pairs;
    out.mean_mod = sum_mod / out.pairs;
    out.impr = improvement(pooled);
    out.p_value = wilcoxon_signed_rank(pooled).p_value;
    return out;
}

std::pair<bool, std::string> end_to_end_signal_check() {
    const SignalRun with_signal = end_to_end_run(3.0);
    const SignalRun no_signal = end_to_end_run(0.0);
    const bool signal_ok = with_signal.pairs >= 50 && with_signal.mean_mod > with_signal.mean_trad &&
                           with_signal.p_value < 0.05;
    const bool null_ok = std::fabs(no_signal.impr) < 0.02 && no_signal.p_value > 0.05;
    return {signal_ok && null_ok,
            "signal: mod " + fmt(with_signal.mean_mod) + " vs trad " + fmt(with_signal.mean_trad) +
                " (impr " + fmt(with_signal.impr * 100.0) + "%, p = " + fmt(with_signal.p_value) +
                ", " + std::to_string(with_signal.pairs) + " pairs); no-signal: impr " +
                fmt(no_signal.impr * 100.0) + "%, p = " + fmt(no_signal.p_value)};
}

std::pair<bool, std::string> random_baseline() {
    GenSpec spec;
    spec.versions = 1;
    spec.tests_per_version = 30;
    spec.units_per_version = 60;
    spec.classes = 12;
    spec.coverage_density = 0.1;
    spec.fault_rate = 0.3;
    spec.signal_strength = 0.0;
    spec.failure_link = 0.8;
    spec.seed = 107;
    const Project p = generate_project(spec);
    const auto& version = p.versions[0];
    const auto failed = version.failed_test_indices();
    if (failed.empty() || failed.size() == static_cast<std::size_t>(version.n_tests())) {
        return {false, "fixture degenerate (adjust generator seed)"};
    }
    double sum = 0.0;
    const int runs = 10000;
    for (int seed = 0; seed < runs; ++seed) {
        const auto res = prioritize_random(version.n_tests(), static_cast<std::uint64_t>(seed));
        sum += apfd(res.order, failed, version.n_tests()).value;
    }
    const double mean = sum / runs;
    return {std::fabs(mean - 0.5) <= 0.02,
            "mean APFD over 10000 seeded runs = " + fmt(mean) + " (needs 0.5 +- 0.02)"};
}

std::pair<bool, std::string> determinism() {
    GenSpec spec;
    spec.versions = 8;
    spec.tests_per_version = 20;
    spec.units_per_version = 40;
    spec.classes = 10;
    spec.coverage_density = 0.08;
    spec.fault_rate = 0.15;
    spec.signal_strength = 2.0;
    spec.failure_link = 0.8;
    spec.seed = 108;
    const fs::path dataset = fs::temp_directory_path() / "tcprank_acc_det";
    fs::remove_all(dataset);
    generate(spec, dataset);

    auto run_once = [&](const fs::path& out, int workers) {
        ExperimentConfig cfg;
        cfg.dataset_path = dataset;
        cfg.output_dir = out;
        cfg.seed = 5;
        cfg.p0_sweep = {0.1, 0.5, 1.0};
        cfg.workers = workers;
        cfg.measure_runtimes = false;  // wall-clock timings are the one non-reproducible column
        cfg.train_config.iterations = 5;
        fs::remove_all(out);
        run_experiment(cfg);
    };
    const fs::path out1 = fs::temp_directory_path() / "tcprank_acc_det1";
    const fs::path out2 = fs::temp_directory_path() / "tcprank_acc_det2";
    const fs::path out3 = fs::temp_directory_path() / "tcprank_acc_det3";
    run_once(out1, 1);
    run_once(out2, 1);
    run_once(out3, 4);

    auto slurp = [](const fs::path& f) {
        std::ifstream in(f, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    int differing = 0;
    for (const char* name : {"apfd_per_version.csv", "summary.json", "p0_sweep.csv", "skips.csv"}) {
        const std::string a = slurp(out1 / name);
        if (a.empty()) ++differing;
        if (a != slurp(out2 / name) || a != slurp(out3 / name)) ++differing;
    }
    return {differing == 0,
            differing == 0 ? "4 output files byte-identical across reruns and worker counts 1/4"
                           : std::to_string(differing) + " files differ"};
}

std::pair<bool, std::string> complexity_trend() {
    Rng rng(109);
    const int m = 500;
    auto bench_additional = [&](int n) {
        const auto cover = CoverageMatrix::from_dense(random_dense(n, m, rng, 1.0, true));
        const auto ones = uniform_probabilities(m);
        std::vector<double> times;
        for (int trial = 0; trial < 5; ++trial) {
            const auto start = Clock::now();
            auto res = prioritize_additional(cover, ones);
            times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
            if (res.order.empty()) std::abort();
        }
        std::sort(times.begin(), times.end());
        return times[2];
    };
    auto bench_total = [&](int n) {
        const auto cover = CoverageMatrix::from_dense(random_dense(n, m, rng, 1.0, true));
        const auto ones = uniform_probabilities(m);
        std::vector<double> times;
        for (int trial = 0; trial < 5; ++trial) {
            const auto start = Clock::now();
            for (int rep = 0; rep < 200; ++rep) {
                auto res = prioritize_total(cover, ones);
                if (res.order.empty()) std::abort();
            }
            times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        }
        std::sort(times.begin(), times.end());
        return times[2];
    };
    const double add_ratio = bench_additional(400) / bench_additional(200);
    const double tot_ratio = bench_total(400) / bench_total(200);
    const bool ok = add_ratio >= 3.0 && add_ratio <= 5.5 && tot_ratio >= 1.5 && tot_ratio <= 3.0;
    return {ok, "n 200->400 runtime ratios: additional x" + fmt(add_ratio) +
                    " (band [3,5.5]), total x" + fmt(tot_ratio) + " (band [1.5,3])"};
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    run(1, "apfd matches brute-force evaluation bitwise", apfd_oracle_equivalence);
    run(2, "all-failures suites score exactly 0.5", all_failures_identity);
    run(3, "unit probabilities reproduce traditional strategies", traditional_degeneracy);
    run(4, "p0=1 collapses to traditional, p0=0 to raw scores", p0_degeneracy);
    run(5, "defect predictor trains and its gradients check out", defect_predictor_soundness);
    run(6, "fault-proneness weighting helps iff a signal exists", end_to_end_signal_check);
    run(7, "random strategy averages APFD 0.5", random_baseline);
    run(8, "byte-identical reports for equal configs", determinism);
    run(9, "runtime scaling follows the documented complexity", complexity_trend);
    std::printf("[INFO] criterion 10: full-dataset reproduction is an offline check; "
                "see README (not run in CI)\n");
    if (failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", failures);
    }
    return failures;
}
