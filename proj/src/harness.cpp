#include "tcprank/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "tcprank/csv.hpp"
#include "tcprank/dataset.hpp"
#include "tcprank/errors.hpp"
#include "tcprank/rng.hpp"

namespace tcprank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct VersionOutcome {
    int version_id = 0;
    std::optional<std::string> skip_reason;
    std::vector<ApfdRow> rows;
    std::optional<bool> bug_predicted;  // set when the version has buggy classes
};

std::vector<double> eval_p0_values(const ExperimentConfig& cfg) {
    std::vector<double> values = cfg.p0_sweep;
    values.push_back(cfg.p0);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

// Count of versions before `index` that contain at least one buggy class.
int prior_buggy_versions(const std::vector<VersionRecord>& versions, std::size_t index) {
    int count = 0;
    for (std::size_t i = 0; i < index; ++i) {
        if (versions[i].has_buggy_class()) ++count;
    }
    return count;
}

VersionOutcome evaluate_version(const Project& project, std::size_t index,
                                const ExperimentConfig& cfg,
                                const std::vector<double>& p0_values,
                                std::map<int, DefectModel>& model_cache) {
    const auto& versions = project.versions;
    const VersionRecord& version = versions[index];
    VersionOutcome out;
    out.version_id = version.version_id;

    if (cfg.eval_window > 0 &&
        index + static_cast<std::size_t>(cfg.eval_window) < versions.size()) {
        out.skip_reason = "outside_eval_window";
        return out;
    }
    if (prior_buggy_versions(versions, index) < cfg.min_training_versions) {
        out.skip_reason = "insufficient_history";
        return out;
    }
    if (version.outcomes.failed.empty()) {
        out.skip_reason = "no_failing_tests";
        return out;
    }

    const std::uint64_t project_seed = mix_seed(cfg.seed, fnv1a64(project.name));
    const std::uint64_t version_seed = mix_seed(project_seed, static_cast<std::uint64_t>(version.version_id));

    // Train on all strictly earlier versions (or reuse an earlier model).
    const DefectModel* model = nullptr;
    if (cfg.reuse_model && !model_cache.empty()) {
        model = &model_cache.rbegin()->second;
    } else {
        TrainConfig tc = cfg.train_config;
        tc.seed = mix_seed(version_seed, 1);
        DefectModel trained = train(build_training_set(versions, version.version_id), tc);
        model = &model_cache.emplace(version.version_id, std::move(trained)).first->second;
    }

    std::map<std::string, double> class_scores;
    for (const auto& cf : version.class_features) {
        class_scores[cf.class_id] = model->predict(cf.features);
    }
    const std::vector<double> pdp = unit_class_scores(version, class_scores);

    if (version.has_buggy_class()) {
        out.bug_predicted = predicted_bug_diagnostic(*model, version);
    }

    const std::vector<int> failed = version.failed_test_indices();
    const int n = version.n_tests();
    const UnitProbabilities ones = uniform_probabilities(version.n_units());

    auto timed = [&](auto&& fn) -> std::pair<PrioritizationResult, std::optional<double>> {
        if (!cfg.measure_runtimes) return {fn(), std::nullopt};
        const auto start = std::chrono::steady_clock::now();
        PrioritizationResult r = fn();
        const auto stop = std::chrono::steady_clock::now();
        return {std::move(r), std::chrono::duration<double, std::milli>(stop - start).count()};
    };

    for (Strategy strategy : cfg.strategies) {
        switch (strategy) {
            case Strategy::random: {
                auto [res, ms] = timed([&] {
                    return prioritize_random(n, mix_seed(version_seed, 2));
                });
                out.rows.push_back({project.name, version.version_id, strategy, std::nullopt,
                                    apfd(res.order, failed, n).value, ms});
                break;
            }
            case Strategy::total:
            case Strategy::additional: {
                auto [res, ms] = timed([&] {
                    return strategy == Strategy::total
                               ? prioritize_total(version.coverage, ones)
                               : prioritize_additional(version.coverage, ones);
                });
                out.rows.push_back({project.name, version.version_id, strategy, std::nullopt,
                                    apfd(res.order, failed, n).value, ms});
                break;
            }
            case Strategy::mod_total:
            case Strategy::mod_additional: {
                for (double p0 : p0_values) {
                    const UnitProbabilities probs = combine_probability(pdp, p0);
                    auto [res, ms] = timed([&] {
                        return strategy == Strategy::mod_total
                                   ? prioritize_total(version.coverage, probs)
                                   : prioritize_additional(version.coverage, probs);
                    });
                    out.rows.push_back({project.name, version.version_id, strategy, p0,
                                        apfd(res.order, failed, n).value, ms});
                }
                break;
            }
        }
    }
    return out;
}

struct PairKey {
    std::string project;
    Strategy strategy;
    std::optional<double> p0;
};

// mean + improvement + wilcoxon for one strategy column within one group
StrategySummary summarize_strategy(Strategy strategy, std::optional<double> p0,
                                   const std::vector<double>& apfds,
                                   const std::vector<PairedComparison::Entry>& pairs) {
    StrategySummary s;
    s.strategy = strategy;
    s.p0 = p0;
    s.n_versions = static_cast<int>(apfds.size());
    double sum = 0.0;
    for (double a : apfds) sum += a;
    s.mean_apfd = apfds.empty() ? 0.0 : sum / static_cast<double>(apfds.size());
    if (!pairs.empty()) {
        PairedComparison pc{pairs};
        s.improvement = improvement(pc);
        try {
            s.wilcoxon = wilcoxon_signed_rank(pc);
        } catch (const TooFewSamplesError&) {
            // reported without a test when nearly all differences are zero
        }
    }
    return s;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const std::vector<Project> projects = load_collection(cfg.dataset_path);
    const std::vector<double> p0_values = eval_p0_values(cfg);

    ExperimentReport report;
    struct Job {
        const Project* project;
        std::size_t version_index;
    };
    std::vector<Job> jobs;
    for (const auto& project : projects) {
        report.total_versions += static_cast<int>(project.versions.size());
        // The first version of a project is never evaluated (no history).
        for (std::size_t i = 1; i < project.versions.size(); ++i) {
            jobs.push_back({&project, i});
        }
    }

    std::vector<VersionOutcome> outcomes(jobs.size());
    const int workers = std::max(1, cfg.workers);
    if (workers == 1 || cfg.reuse_model) {
        // model reuse is inherently sequential within a project
        std::map<const Project*, std::map<int, DefectModel>> caches;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            outcomes[j] = evaluate_version(*jobs[j].project, jobs[j].version_index, cfg, p0_values,
                                           caches[jobs[j].project]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t j = next.fetch_add(1);
                if (j >= jobs.size()) return;
                std::map<int, DefectModel> local_cache;
                outcomes[j] = evaluate_version(*jobs[j].project, jobs[j].version_index, cfg,
                                               p0_values, local_cache);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Assemble rows/skips in deterministic (project, version) order.
    std::map<std::string, std::pair<int, int>> diagnostics;  // project -> (predicted, with_buggy)
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& oc = outcomes[j];
        const std::string& pname = jobs[j].project->name;
        if (oc.skip_reason) {
            report.skips.push_back({pname, oc.version_id, *oc.skip_reason});
            continue;
        }
        report.rows.insert(report.rows.end(), oc.rows.begin(), oc.rows.end());
        if (oc.bug_predicted.has_value()) {
            auto& d = diagnostics[pname];
            d.second += 1;
            if (*oc.bug_predicted) d.first += 1;
        }
    }

    // Group summaries: one per project plus a pooled "overall" group.
    auto column = [&](const std::string& project_or_all, Strategy strategy,
                      std::optional<double> p0) {
        std::vector<double> values;
        for (const auto& row : report.rows) {
            if (row.strategy != strategy || row.p0 != p0) continue;
            if (!project_or_all.empty() && row.project != project_or_all) continue;
            values.push_back(row.apfd);
        }
        return values;
    };
    auto pairs_for = [&](const std::string& project_or_all, Strategy mod, Strategy trad,
                         std::optional<double> p0) {
        std::vector<PairedComparison::Entry> pairs;
        std::map<std::pair<std::string, int>, double> trad_by_version;
        for (const auto& row : report.rows) {
            if (row.strategy == trad && !row.p0 &&
                (project_or_all.empty() || row.project == project_or_all)) {
                trad_by_version[{row.project, row.version_id}] = row.apfd;
            }
        }
        for (const auto& row : report.rows) {
            if (row.strategy != mod || row.p0 != p0) continue;
            if (!project_or_all.empty() && row.project != project_or_all) continue;
            auto it = trad_by_version.find({row.project, row.version_id});
            if (it != trad_by_version.end()) {
                pairs.push_back({row.version_id, it->second, row.apfd});
            }
        }
        return pairs;
    };

    auto has_strategy = [&](Strategy s) {
        return std::find(cfg.strategies.begin(), cfg.strategies.end(), s) != cfg.strategies.end();
    };
    std::vector<std::string> group_names;
    for (const auto& p : projects) group_names.push_back(p.name);
    group_names.emplace_back("");  // pooled

    for (const auto& gname : group_names) {
        SummaryGroup group;
        group.name = gname.empty() ? "overall" : gname;
        for (Strategy s : cfg.strategies) {
            if (!is_modified(s)) {
                auto values = column(gname, s, std::nullopt);
                if (!values.empty()) {
                    group.strategies.push_back(
                        summarize_strategy(s, std::nullopt, values, {}));
                }
                continue;
            }
            const Strategy trad = *traditional_counterpart(s);
            for (double p0 : p0_values) {
                auto values = column(gname, s, p0);
                if (values.empty()) continue;
                std::vector<PairedComparison::Entry> pairs;
                if (has_strategy(trad)) pairs = pairs_for(gname, s, trad, p0);
                group.strategies.push_back(summarize_strategy(s, p0, values, pairs));
            }
        }
        if (gname.empty()) {
            for (const auto& [pn, d] : diagnostics) {
                group.predicted_bugs += d.first;
                group.versions_with_buggy_classes += d.second;
            }
        } else if (auto it = diagnostics.find(gname); it != diagnostics.end()) {
            group.predicted_bugs = it->second.first;
            group.versions_with_buggy_classes = it->second.second;
        }
        report.groups.push_back(std::move(group));
    }

    // Sweep curves: mean APFD per (project, modified strategy, sweep p0).
    for (const auto& p : projects) {
        for (Strategy s : cfg.strategies) {
            if (!is_modified(s)) continue;
            for (double p0 : cfg.p0_sweep) {
                auto values = column(p.name, s, p0);
                if (values.empty()) continue;
                double sum = 0.0;
                for (double v : values) sum += v;
                report.sweep.push_back({p.name, s, p0, sum / static_cast<double>(values.size())});
            }
        }
    }

    if (!cfg.output_dir.empty()) {
        emit_report(report, cfg.output_dir);
    }
    return report;
}

void emit_report(const ExperimentReport& report, const fs::path& dir) {
    fs::create_directories(dir);

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows) {
        rows.push_back({r.project, std::to_string(r.version_id), to_string(r.strategy),
                        r.p0 ? format_double(*r.p0) : "", format_double(r.apfd),
                        r.runtime_ms ? format_double(*r.runtime_ms) : ""});
    }
    write_csv(dir / "apfd_per_version.csv",
              {"project", "version_id", "strategy", "p0", "apfd", "runtime_ms"}, rows);

    rows.clear();
    for (const auto& s : report.skips) {
        rows.push_back({s.project, std::to_string(s.version_id), s.reason});
    }
    write_csv(dir / "skips.csv", {"project", "version_id", "reason"}, rows);

    rows.clear();
    for (const auto& s : report.sweep) {
        rows.push_back({s.project, to_string(s.strategy), format_double(s.p0),
                        format_double(s.mean_apfd)});
    }
    write_csv(dir / "p0_sweep.csv", {"project", "strategy", "p0", "mean_apfd"}, rows);

    json summary;
    for (const auto& group : report.groups) {
        json strategies;
        for (const auto& s : group.strategies) {
            json entry;
            entry["mean_apfd"] = s.mean_apfd;
            entry["n_versions"] = s.n_versions;
            if (s.improvement) entry["improvement"] = *s.improvement;
            if (s.wilcoxon) {
                entry["wilcoxon"] = {{"statistic", s.wilcoxon->statistic},
                                     {"p_value", s.wilcoxon->p_value},
                                     {"n_pairs", s.wilcoxon->n_nonzero}};
            }
            if (s.p0) {
                strategies[to_string(s.strategy)][format_double(*s.p0)] = std::move(entry);
            } else {
                strategies[to_string(s.strategy)] = std::move(entry);
            }
        }
        json g;
        g["strategies"] = std::move(strategies);
        g["defect_prediction"] = {{"predicted_bugs", group.predicted_bugs},
                                  {"versions_with_buggy_classes", group.versions_with_buggy_classes}};
        if (group.name == "overall") {
            summary["overall"] = std::move(g);
        } else {
            summary["projects"][group.name] = std::move(g);
        }
    }
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << summary.dump(2) << '\n';
}

}  // namespace tcprank
