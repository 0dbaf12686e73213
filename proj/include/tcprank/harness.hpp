#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcprank/apfd.hpp"
#include "tcprank/defect_model.hpp"
#include "tcprank/prioritization.hpp"
#include "tcprank/types.hpp"

namespace tcprank {

struct ExperimentConfig {
    std::filesystem::path dataset_path;
    std::vector<Strategy> strategies{Strategy::random, Strategy::total, Strategy::additional,
                                     Strategy::mod_total, Strategy::mod_additional};
    double p0 = 0.3;
    std::vector<double> p0_sweep;        // additional p0 values to evaluate
    int min_training_versions = 1;       // required prior versions containing a buggy class
    std::uint64_t seed = 0;
    TrainConfig train_config;
    std::filesystem::path output_dir;
    int eval_window = 0;                 // evaluate only the last K versions; 0 = all
    bool reuse_model = false;            // reuse the most recent trained model
    int workers = 1;
    bool measure_runtimes = true;        // wall-clock runtimes are inherently non-reproducible
};

struct ApfdRow {
    std::string project;
    int version_id;
    Strategy strategy;
    std::optional<double> p0;          // absent for random and the traditional strategies
    double apfd;
    std::optional<double> runtime_ms;  // absent when runtimes are off
};

struct SkipRow {
    std::string project;
    int version_id;
    std::string reason;  // outside_eval_window | insufficient_history | no_failing_tests
};

struct StrategySummary {
    Strategy strategy;
    std::optional<double> p0;
    double mean_apfd = 0.0;
    int n_versions = 0;
    std::optional<double> improvement;       // vs the traditional counterpart
    std::optional<WilcoxonResult> wilcoxon;  // absent when too few non-zero diffs
};

// Aggregates for one project, or pooled over all projects ("overall").
struct SummaryGroup {
    std::string name;
    std::vector<StrategySummary> strategies;
    int predicted_bugs = 0;              // evaluated versions whose bug was predicted
    int versions_with_buggy_classes = 0;
};

struct SweepRow {
    std::string project;
    Strategy strategy;
    double p0;
    double mean_apfd;
};

struct ExperimentReport {
    std::vector<ApfdRow> rows;
    std::vector<SkipRow> skips;
    std::vector<SummaryGroup> groups;  // per project, then "overall"
    std::vector<SweepRow> sweep;
    int total_versions = 0;  // across all projects
};

// Rolling evaluation: for each version with enough history, train a defect
// model on all strictly earlier versions, score classes, extrapolate to
// units, combine with each requested p0 and run the configured strategies.
// Fully deterministic given cfg.seed (per-version seeds are derived from it),
// independent of worker count. Versions without failing tests or without a
// prior buggy version are recorded as skips, not errors.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Writes apfd_per_version.csv, summary.json, p0_sweep.csv and skips.csv.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace tcprank
