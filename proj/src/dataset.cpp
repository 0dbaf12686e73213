#include "tcprank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "tcprank/csv.hpp"
#include "tcprank/errors.hpp"

namespace tcprank {

namespace fs = std::filesystem;
using nlohmann::json;

CoverageMatrix CoverageMatrix::from_triplets(int rows, int cols,
                                             const std::vector<std::tuple<int, int, double>>& triplets,
                                             const std::string& origin) {
    CoverageMatrix m(rows, cols);
    for (const auto& [r, c, v] : triplets) {
        if (r < 0 || r >= rows || c < 0 || c >= cols) {
            throw ConsistencyError(origin + ": cell (" + std::to_string(r) + "," +
                                   std::to_string(c) + ") outside a " + std::to_string(rows) +
                                   "x" + std::to_string(cols) + " matrix");
        }
        if (!(v >= 0.0 && v <= 1.0)) {
            throw RangeError(origin + ": coverage fraction " + format_double(v) + " at cell (" +
                             std::to_string(r) + "," + std::to_string(c) + ") is outside [0,1]");
        }
        if (v == 0.0) continue;
        m.entries_[r].push_back({c, v});
    }
    for (int r = 0; r < rows; ++r) {
        auto& row = m.entries_[r];
        std::sort(row.begin(), row.end(),
                  [](const CoverageEntry& a, const CoverageEntry& b) { return a.col < b.col; });
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i].col == row[i - 1].col) {
                throw ConsistencyError(origin + ": duplicate cell (" + std::to_string(r) + "," +
                                       std::to_string(row[i].col) + ")");
            }
        }
    }
    return m;
}

CoverageMatrix CoverageMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
    const int rows = static_cast<int>(dense.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(dense[0].size());
    std::vector<std::tuple<int, int, double>> triplets;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (dense[r][c] != 0.0) triplets.emplace_back(r, c, dense[r][c]);
        }
    }
    return from_triplets(rows, cols, triplets, "dense");
}

std::vector<std::vector<double>> CoverageMatrix::to_dense() const {
    std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_, 0.0));
    for (int r = 0; r < rows_; ++r) {
        for (const auto& e : entries_[r]) out[r][e.col] = e.fraction;
    }
    return out;
}

bool CoverageMatrix::operator==(const CoverageMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) return false;
    for (int r = 0; r < rows_; ++r) {
        const auto& a = entries_[r];
        const auto& b = other.entries_[r];
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].col != b[i].col || a[i].fraction != b[i].fraction) return false;
        }
    }
    return true;
}

namespace {

std::string loc(const CsvTable& t, std::size_t row) {
    return t.file.string() + ":" + std::to_string(t.line_of(row));
}

void require_header(const CsvTable& t, const std::vector<std::string>& expected) {
    if (t.header != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want += ',';
            want += expected[i];
        }
        throw SchemaError(t.file.string() + ": bad header, expected '" + want + "'");
    }
}

std::vector<std::string> features_header() {
    std::vector<std::string> h{"class_id"};
    for (int i = 1; i <= kFeatureCount; ++i) h.push_back("f" + std::to_string(i));
    h.push_back("is_buggy");
    return h;
}

VersionRecord load_version(const fs::path& dir, int version_id) {
    VersionRecord v;
    v.version_id = version_id;

    // features.csv first: it defines the class table units may reference.
    {
        CsvTable t = read_csv(dir / "features.csv");
        require_header(t, features_header());
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            if (row.size() != static_cast<std::size_t>(kFeatureCount) + 2) {
                throw SchemaError(loc(t, i) + ": expected " + std::to_string(kFeatureCount + 2) +
                                  " fields, got " + std::to_string(row.size()));
            }
            ClassFeatureVector cf;
            cf.class_id = row[0];
            if (cf.class_id.empty()) {
                throw SchemaError(loc(t, i) + ": empty class_id");
            }
            if (!seen.insert(cf.class_id).second) {
                throw ConsistencyError(loc(t, i) + ": duplicate class_id '" + cf.class_id + "'");
            }
            cf.features.reserve(kFeatureCount);
            for (int f = 0; f < kFeatureCount; ++f) {
                const double x = parse_double(row[1 + f], loc(t, i));
                if (!std::isfinite(x)) {
                    throw RangeError(loc(t, i) + ": feature f" + std::to_string(f + 1) +
                                     " is not finite");
                }
                cf.features.push_back(x);
            }
            const long long buggy = parse_int(row[1 + kFeatureCount], loc(t, i));
            if (buggy != 0 && buggy != 1) {
                throw RangeError(loc(t, i) + ": is_buggy must be 0 or 1");
            }
            cf.is_buggy = buggy == 1;
            v.class_features.push_back(std::move(cf));
        }
    }
    std::unordered_set<std::string> class_ids;
    for (const auto& cf : v.class_features) class_ids.insert(cf.class_id);

    std::unordered_map<std::string, int> unit_index;
    {
        CsvTable t = read_csv(dir / "units.csv");
        require_header(t, {"unit_id", "class_id"});
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            if (row.size() != 2) {
                throw SchemaError(loc(t, i) + ": expected 2 fields, got " + std::to_string(row.size()));
            }
            CodeUnit u;
            u.unit_id = row[0];
            if (u.unit_id.empty()) {
                throw SchemaError(loc(t, i) + ": empty unit_id");
            }
            if (!unit_index.emplace(u.unit_id, static_cast<int>(v.units.size())).second) {
                throw ConsistencyError(loc(t, i) + ": duplicate unit_id '" + u.unit_id + "'");
            }
            if (!row[1].empty()) {
                if (!class_ids.count(row[1])) {
                    throw ConsistencyError(loc(t, i) + ": unit '" + u.unit_id +
                                           "' references unknown class_id '" + row[1] + "'");
                }
                u.class_id = row[1];
            }
            v.units.push_back(std::move(u));
        }
    }

    std::unordered_map<std::string, int> test_index;
    {
        CsvTable t = read_csv(dir / "tests.csv");
        require_header(t, {"test_id"});
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            if (row.size() != 1) {
                throw SchemaError(loc(t, i) + ": expected 1 field, got " + std::to_string(row.size()));
            }
            if (row[0].empty()) {
                throw SchemaError(loc(t, i) + ": empty test_id");
            }
            TestCase tc{row[0], static_cast<int>(v.tests.size())};
            if (!test_index.emplace(tc.test_id, tc.suite_index).second) {
                throw ConsistencyError(loc(t, i) + ": duplicate test_id '" + tc.test_id + "'");
            }
            v.tests.push_back(std::move(tc));
        }
    }

    {
        CsvTable t = read_csv(dir / "coverage.csv");
        require_header(t, {"test_id", "unit_id", "fraction"});
        std::vector<std::tuple<int, int, double>> triplets;
        std::set<std::pair<int, int>> seen;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            if (row.size() != 3) {
                throw SchemaError(loc(t, i) + ": expected 3 fields, got " + std::to_string(row.size()));
            }
            auto ti = test_index.find(row[0]);
            if (ti == test_index.end()) {
                throw ConsistencyError(loc(t, i) + ": unknown test_id '" + row[0] + "'");
            }
            auto ui = unit_index.find(row[1]);
            if (ui == unit_index.end()) {
                throw ConsistencyError(loc(t, i) + ": unknown unit_id '" + row[1] + "'");
            }
            const double frac = parse_double(row[2], loc(t, i));
            if (!(frac >= 0.0 && frac <= 1.0)) {
                throw RangeError(loc(t, i) + ": coverage fraction " + row[2] + " for (" + row[0] +
                                 "," + row[1] + ") is outside [0,1]");
            }
            if (!seen.emplace(ti->second, ui->second).second) {
                throw ConsistencyError(loc(t, i) + ": duplicate coverage pair (" + row[0] + "," +
                                       row[1] + ")");
            }
            triplets.emplace_back(ti->second, ui->second, frac);
        }
        v.coverage = CoverageMatrix::from_triplets(v.n_tests(), v.n_units(), triplets,
                                                   (dir / "coverage.csv").string());
    }

    {
        CsvTable t = read_csv(dir / "outcomes.csv");
        require_header(t, {"test_id", "failed"});
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            if (row.size() != 2) {
                throw SchemaError(loc(t, i) + ": expected 2 fields, got " + std::to_string(row.size()));
            }
            if (!test_index.count(row[0])) {
                throw ConsistencyError(loc(t, i) + ": unknown test_id '" + row[0] + "'");
            }
            if (!seen.insert(row[0]).second) {
                throw ConsistencyError(loc(t, i) + ": duplicate outcome for test_id '" + row[0] + "'");
            }
            const long long failed = parse_int(row[1], loc(t, i));
            if (failed != 0 && failed != 1) {
                throw RangeError(loc(t, i) + ": failed must be 0 or 1");
            }
            if (failed == 1) v.outcomes.failed.insert(row[0]);
        }
    }

    return v;
}

}  // namespace

Project load_project(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) {
        throw SchemaError(manifest_path.string() + ": cannot open manifest");
    }
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw SchemaError(manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("project") || !manifest["project"].is_string() ||
        !manifest.contains("versions") || !manifest["versions"].is_array()) {
        throw SchemaError(manifest_path.string() + ": expected {\"project\": <name>, \"versions\": [ids]}");
    }

    Project project;
    project.name = manifest["project"].get<std::string>();
    int prev_id = 0;
    for (const auto& entry : manifest["versions"]) {
        if (!entry.is_number_integer()) {
            throw SchemaError(manifest_path.string() + ": version ids must be integers");
        }
        const int id = entry.get<int>();
        if (id <= prev_id) {
            throw ConsistencyError(manifest_path.string() + ": version ids must be strictly increasing, got " +
                                   std::to_string(id) + " after " + std::to_string(prev_id));
        }
        prev_id = id;
        project.versions.push_back(load_version(dir / std::to_string(id), id));
    }
    return project;
}

std::vector<Project> load_collection(const fs::path& dir) {
    if (fs::exists(dir / "manifest.json")) {
        return {load_project(dir)};
    }
    std::vector<fs::path> subdirs;
    if (!fs::is_directory(dir)) {
        throw SchemaError(dir.string() + ": not a directory");
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
            subdirs.push_back(entry.path());
        }
    }
    if (subdirs.empty()) {
        throw SchemaError(dir.string() + ": no manifest.json here or in any subdirectory");
    }
    std::sort(subdirs.begin(), subdirs.end());
    std::vector<Project> projects;
    projects.reserve(subdirs.size());
    for (const auto& p : subdirs) projects.push_back(load_project(p));
    return projects;
}

void save_project(const Project& project, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["project"] = project.name;
    json ids = json::array();
    for (const auto& v : project.versions) ids.push_back(v.version_id);
    manifest["versions"] = ids;
    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << manifest.dump(2) << '\n';
    }

    for (const auto& v : project.versions) {
        const fs::path vdir = dir / std::to_string(v.version_id);
        fs::create_directories(vdir);

        std::vector<std::vector<std::string>> rows;
        for (const auto& u : v.units) {
            rows.push_back({u.unit_id, u.class_id.value_or("")});
        }
        write_csv(vdir / "units.csv", {"unit_id", "class_id"}, rows);

        rows.clear();
        for (const auto& t : v.tests) rows.push_back({t.test_id});
        write_csv(vdir / "tests.csv", {"test_id"}, rows);

        rows.clear();
        for (int r = 0; r < v.coverage.n_rows(); ++r) {
            for (const auto& e : v.coverage.row(r)) {
                rows.push_back({v.tests[r].test_id, v.units[e.col].unit_id, format_double(e.fraction)});
            }
        }
        write_csv(vdir / "coverage.csv", {"test_id", "unit_id", "fraction"}, rows);

        rows.clear();
        for (const auto& t : v.tests) {
            rows.push_back({t.test_id, v.outcomes.failed.count(t.test_id) ? "1" : "0"});
        }
        write_csv(vdir / "outcomes.csv", {"test_id", "failed"}, rows);

        rows.clear();
        for (const auto& cf : v.class_features) {
            std::vector<std::string> row{cf.class_id};
            for (double f : cf.features) row.push_back(format_double(f));
            row.push_back(cf.is_buggy ? "1" : "0");
            rows.push_back(std::move(row));
        }
        write_csv(vdir / "features.csv", features_header(), rows);
    }
}

std::vector<double> unit_class_scores(const VersionRecord& version,
                                      const std::map<std::string, double>& class_scores) {
    std::vector<double> out(version.units.size(), 0.0);
    for (std::size_t j = 0; j < version.units.size(); ++j) {
        const auto& u = version.units[j];
        if (!u.class_id) continue;
        auto it = class_scores.find(*u.class_id);
        if (it != class_scores.end()) out[j] = it->second;
    }
    return out;
}

}  // namespace tcprank
