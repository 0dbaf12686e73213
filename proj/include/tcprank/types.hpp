#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tcprank {

// Number of per-class features consumed by the defect predictor.
inline constexpr int kFeatureCount = 104;

struct CodeUnit {
    std::string unit_id;
    std::optional<std::string> class_id;  // enclosing class, may be absent
};

struct TestCase {
    std::string test_id;
    int suite_index = 0;  // position in the original suite, 0..n-1
};

struct CoverageEntry {
    int col;
    double fraction;  // in (0, 1]; zeros are not stored
};

// n tests x m units, sparse by row. Entries are coverage fractions in [0,1];
// explicit zeros are dropped on construction.
class CoverageMatrix {
public:
    CoverageMatrix() = default;
    CoverageMatrix(int rows, int cols) : rows_(rows), cols_(cols), entries_(rows) {}

    // Triplets (row, col, fraction). Throws on out-of-range values, bad
    // indices or duplicate cells; `origin` names the source in errors.
    static CoverageMatrix from_triplets(int rows, int cols,
                                        const std::vector<std::tuple<int, int, double>>& triplets,
                                        const std::string& origin = "coverage");

    static CoverageMatrix from_dense(const std::vector<std::vector<double>>& dense);

    int n_rows() const { return rows_; }
    int n_cols() const { return cols_; }

    const std::vector<CoverageEntry>& row(int i) const { return entries_[i]; }

    // Sum of the row's fractions (total coverage of the test).
    double row_total(int i) const {
        double s = 0.0;
        for (const auto& e : entries_[i]) s += e.fraction;
        return s;
    }

    std::vector<std::vector<double>> to_dense() const;

    bool operator==(const CoverageMatrix& other) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::vector<CoverageEntry>> entries_;  // per row, sorted by col
};

struct TestOutcomes {
    std::set<std::string> failed;  // test_ids failing on this version
};

struct ClassFeatureVector {
    std::string class_id;
    std::vector<double> features;  // length kFeatureCount, all finite
    bool is_buggy = false;
};

struct VersionRecord {
    int version_id = 0;  // 1-based, strictly increasing within a project
    std::vector<CodeUnit> units;
    std::vector<TestCase> tests;
    CoverageMatrix coverage;
    TestOutcomes outcomes;
    std::vector<ClassFeatureVector> class_features;

    int n_tests() const { return static_cast<int>(tests.size()); }
    int n_units() const { return static_cast<int>(units.size()); }

    // Row indices of failing tests, ascending.
    std::vector<int> failed_test_indices() const {
        std::vector<int> out;
        for (const auto& t : tests) {
            if (outcomes.failed.count(t.test_id)) out.push_back(t.suite_index);
        }
        return out;
    }

    bool has_buggy_class() const {
        for (const auto& cf : class_features) {
            if (cf.is_buggy) return true;
        }
        return false;
    }
};

struct Project {
    std::string name;
    std::vector<VersionRecord> versions;  // sorted by version_id
};

}  // namespace tcprank
