#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tcprank/types.hpp"

namespace tcprank {

// Recipe for a deterministic multi-version project. Bugginess follows a
// logistic link on 5 designated features; the intercept is variance-corrected
// so fault_rate stays the marginal buggy probability at any signal strength.
// A test fails iff it covers at least one unit of a buggy class and a
// Bernoulli(failure_link) draw succeeds.
struct GenSpec {
    int versions = 2;
    int tests_per_version = 20;
    int units_per_version = 40;
    int classes = 10;
    // Each test covers max(1, round(density * units)) distinct units with
    // fraction 1.0; density 1 gives the dense all-ones matrix.
    double coverage_density = 0.05;
    double fault_rate = 0.1;       // target marginal buggy probability, in (0,1)
    double signal_strength = 0.0;  // how strongly the 5 features drive bugginess
    double failure_link = 0.8;
    std::uint64_t seed = 0;
    std::string project_name = "synthetic";
};

// Validates the spec (throws SpecError) and builds the project in memory.
// Byte-identical datasets for a given spec.
Project generate_project(const GenSpec& spec);

// generate_project + save_project: writes a dataset directory that
// load_project accepts.
void generate(const GenSpec& spec, const std::filesystem::path& out_dir);

}  // namespace tcprank
