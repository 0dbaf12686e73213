#include "tcprank/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "tcprank/dataset.hpp"
#include "tcprank/errors.hpp"
#include "tcprank/rng.hpp"

namespace tcprank {

namespace {

constexpr int kSignalFeatures = 5;

void validate(const GenSpec& s) {
    if (s.versions < 1 || s.tests_per_version < 1 || s.units_per_version < 1 || s.classes < 1) {
        throw SpecError("generate: all counts must be >= 1");
    }
    if (!(s.coverage_density > 0.0 && s.coverage_density <= 1.0)) {
        throw SpecError("generate: coverage_density must be in (0,1]");
    }
    if (!(s.fault_rate > 0.0 && s.fault_rate < 1.0)) {
        throw SpecError("generate: fault_rate must be in (0,1)");
    }
    if (s.signal_strength < 0.0) {
        throw SpecError("generate: signal_strength must be >= 0");
    }
    if (!(s.failure_link >= 0.0 && s.failure_link <= 1.0)) {
        throw SpecError("generate: failure_link must be in [0,1]");
    }
    if (s.project_name.empty()) {
        throw SpecError("generate: project_name must not be empty");
    }
}

}  // namespace

Project generate_project(const GenSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);

    const int m = spec.units_per_version;
    const int n = spec.tests_per_version;
    const int c = spec.classes;
    const int covered_per_test =
        std::max(1, static_cast<int>(std::llround(spec.coverage_density * m)));

    // Logistic-normal mean correction: E[sigmoid(b0 + s*z)] with z ~ N(0,1)
    // is approximately sigmoid(b0 / sqrt(1 + 0.346 s^2)), so scaling the
    // intercept keeps the marginal buggy rate near fault_rate for any s.
    const double logit = std::log(spec.fault_rate / (1.0 - spec.fault_rate));
    const double intercept =
        logit * std::sqrt(1.0 + 0.346 * spec.signal_strength * spec.signal_strength);

    Project project;
    project.name = spec.project_name;

    for (int v = 1; v <= spec.versions; ++v) {
        VersionRecord ver;
        ver.version_id = v;

        std::vector<bool> buggy(c, false);
        for (int k = 0; k < c; ++k) {
            ClassFeatureVector cf;
            cf.class_id = "C" + std::to_string(k);
            cf.features.reserve(kFeatureCount);
            for (int f = 0; f < kFeatureCount; ++f) cf.features.push_back(rng.normal());
            double z = 0.0;
            for (int f = 0; f < kSignalFeatures; ++f) z += cf.features[f];
            z /= std::sqrt(static_cast<double>(kSignalFeatures));
            const double p_bug =
                1.0 / (1.0 + std::exp(-(intercept + spec.signal_strength * z)));
            cf.is_buggy = rng.uniform01() < p_bug;
            buggy[k] = cf.is_buggy;
            ver.class_features.push_back(std::move(cf));
        }

        for (int j = 0; j < m; ++j) {
            ver.units.push_back({"u" + std::to_string(j), "C" + std::to_string(j % c)});
        }
        for (int i = 0; i < n; ++i) {
            ver.tests.push_back({"t" + std::to_string(i), i});
        }

        std::vector<std::tuple<int, int, double>> triplets;
        std::vector<bool> covers_buggy(n, false);
        for (int i = 0; i < n; ++i) {
            auto cols = rng.sample_without_replacement(m, covered_per_test);
            std::sort(cols.begin(), cols.end());
            for (std::size_t col : cols) {
                triplets.emplace_back(i, static_cast<int>(col), 1.0);
                if (buggy[col % c]) covers_buggy[i] = true;
            }
        }
        ver.coverage = CoverageMatrix::from_triplets(n, m, triplets, "generate");

        for (int i = 0; i < n; ++i) {
            // one link draw per test, taken unconditionally to keep the
            // random stream independent of the bug pattern
            const bool linked = rng.uniform01() < spec.failure_link;
            if (covers_buggy[i] && linked) ver.outcomes.failed.insert(ver.tests[i].test_id);
        }

        project.versions.push_back(std::move(ver));
    }
    return project;
}

void generate(const GenSpec& spec, const std::filesystem::path& out_dir) {
    save_project(generate_project(spec), out_dir);
}

}  // namespace tcprank
