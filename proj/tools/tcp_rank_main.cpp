#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcprank/csv.hpp"
#include "tcprank/dataset.hpp"
#include "tcprank/errors.hpp"
#include "tcprank/harness.hpp"
#include "tcprank/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 2;
constexpr int kExitConfigError = 3;

std::vector<tcprank::Strategy> parse_strategies(const std::string& csv) {
    std::vector<tcprank::Strategy> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto s = tcprank::parse_strategy(item);
        if (!s) {
            throw tcprank::ConfigError("unknown strategy '" + item +
                                       "' (expected random,total,additional,mod_total,mod_additional)");
        }
        out.push_back(*s);
    }
    if (out.empty()) {
        throw tcprank::ConfigError("no strategies given");
    }
    return out;
}

// "a:b:step" ranges or comma-separated values, all in [0,1].
std::vector<double> parse_sweep(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double lo, hi, step;
        char c1, c2;
        std::stringstream ss(text);
        if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0) {
            throw tcprank::ConfigError("bad sweep '" + text + "', expected lo:hi:step");
        }
        for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(std::min(v, 1.0));
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            out.push_back(std::stod(item));
        }
    }
    for (double v : out) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw tcprank::ConfigError("sweep value " + std::to_string(v) + " outside [0,1]");
        }
    }
    return out;
}

int run_command(const tcprank::ExperimentConfig& cfg) {
    const auto report = tcprank::run_experiment(cfg);
    int evaluated = 0;
    for (const auto& g : report.groups) {
        if (g.name == "overall") continue;
        ++evaluated;
    }
    std::printf("evaluated %zu version/strategy rows, %zu skips, %d project(s)\n",
                report.rows.size(), report.skips.size(), evaluated);
    for (const auto& g : report.groups) {
        for (const auto& s : g.strategies) {
            std::string label = tcprank::to_string(s.strategy);
            if (s.p0) label += "@" + tcprank::format_double(*s.p0);
            std::printf("  [%s] %-22s mean APFD %.4f over %d versions", g.name.c_str(),
                        label.c_str(), s.mean_apfd, s.n_versions);
            if (s.improvement) std::printf(", improvement %+.2f%%", *s.improvement * 100.0);
            if (s.wilcoxon) std::printf(", wilcoxon p=%.4g", s.wilcoxon->p_value);
            std::printf("\n");
        }
    }
    std::printf("report written to %s\n", cfg.output_dir.string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coverage-based test case prioritization with fault-proneness weighting"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the rolling prioritization experiment");
    std::string dataset, out_dir, strategies_csv, sweep_text;
    tcprank::ExperimentConfig cfg;
    run->add_option("--dataset", dataset, "dataset directory")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--strategies", strategies_csv,
                    "comma list of random,total,additional,mod_total,mod_additional");
    run->add_option("--p0", cfg.p0, "probability floor of the combiner")->check(CLI::Range(0.0, 1.0));
    run->add_option("--p0-sweep", sweep_text, "extra p0 values, lo:hi:step or comma list");
    run->add_option("--eval-window", cfg.eval_window, "evaluate only the last K versions");
    run->add_option("--seed", cfg.seed, "experiment seed");
    run->add_option("--workers", cfg.workers, "parallel version evaluations");
    run->add_option("--min-training-versions", cfg.min_training_versions,
                    "required prior versions with a buggy class");
    run->add_flag("--reuse-model", cfg.reuse_model, "reuse the most recent defect model");
    bool no_timings = false;
    run->add_flag("--no-timings", no_timings,
                  "omit wall-clock runtimes for byte-reproducible reports");
    run->add_option("--train-iterations", cfg.train_config.iterations, "subsampling rounds");
    run->add_option("--train-epochs", cfg.train_config.epochs_per_iteration,
                    "optimizer steps per round");
    run->add_option("--train-lr", cfg.train_config.learning_rate, "learning rate");
    run->add_option("--train-neg-ratio", cfg.train_config.neg_pos_ratio,
                    "negatives per positive in each round");

    auto* validate = app.add_subcommand("validate", "load a dataset and check every invariant");
    std::string val_dataset;
    validate->add_option("--dataset", val_dataset, "dataset directory")->required();

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    tcprank::GenSpec spec;
    std::string gen_out;
    gen->add_option("--versions", spec.versions, "number of versions")->required();
    gen->add_option("--tests", spec.tests_per_version, "tests per version")->required();
    gen->add_option("--units", spec.units_per_version, "units per version")->required();
    gen->add_option("--classes", spec.classes, "classes per version")->required();
    gen->add_option("--density", spec.coverage_density, "fraction of units each test covers");
    gen->add_option("--fault-rate", spec.fault_rate, "marginal buggy probability");
    gen->add_option("--signal", spec.signal_strength, "bug-predictability of the features");
    gen->add_option("--failure-link", spec.failure_link,
                    "probability a buggy-unit-covering test fails");
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--name", spec.project_name, "project name in the manifest");
    gen->add_option("--out", gen_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run->parsed()) {
            cfg.dataset_path = dataset;
            cfg.output_dir = out_dir;
            cfg.measure_runtimes = !no_timings;
            if (!strategies_csv.empty()) cfg.strategies = parse_strategies(strategies_csv);
            if (!sweep_text.empty()) cfg.p0_sweep = parse_sweep(sweep_text);
            return run_command(cfg);
        }
        if (validate->parsed()) {
            const auto projects = tcprank::load_collection(val_dataset);
            for (const auto& p : projects) {
                std::printf("%s: %zu versions", p.name.c_str(), p.versions.size());
                if (!p.versions.empty()) {
                    const auto& v = p.versions.front();
                    std::printf(" (first: %d tests, %d units, %zu classes)", v.n_tests(),
                                v.n_units(), v.class_features.size());
                }
                std::printf("\n");
            }
            std::printf("dataset OK\n");
            return kExitOk;
        }
        if (gen->parsed()) {
            tcprank::generate(spec, gen_out);
            std::printf("dataset written to %s\n", gen_out.c_str());
            return kExitOk;
        }
    } catch (const tcprank::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const tcprank::SpecError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const tcprank::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitOk;
}
