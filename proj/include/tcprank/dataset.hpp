#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tcprank/types.hpp"

namespace tcprank {

// Loads a project dataset directory:
//   manifest.json            {"project": <name>, "versions": [ids in order]}
//   <version_id>/units.csv     unit_id,class_id          (class_id may be empty)
//   <version_id>/tests.csv     test_id                   (row order = suite_index)
//   <version_id>/coverage.csv  test_id,unit_id,fraction  (omitted pairs = 0)
//   <version_id>/outcomes.csv  test_id,failed            (failed in {0,1})
//   <version_id>/features.csv  class_id,f1..f104,is_buggy
// All invariants are validated; errors carry file and record location.
Project load_project(const std::filesystem::path& dir);

// A dataset directory is either a single project (has manifest.json) or a
// directory of project subdirectories. Returns projects sorted by name.
std::vector<Project> load_collection(const std::filesystem::path& dir);

// Writes the same schema load_project reads. Matrices and feature values
// round-trip bit-exactly (shortest round-trip decimal form).
void save_project(const Project& project, const std::filesystem::path& dir);

// Extrapolates class-level scores to units: a unit scores what its enclosing
// class scores; units with no class or no scored class get 0.
// `class_scores` values are expected in [0,1].
std::vector<double> unit_class_scores(const VersionRecord& version,
                                      const std::map<std::string, double>& class_scores);

}  // namespace tcprank
