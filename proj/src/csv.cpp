#include "tcprank/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tcprank/errors.hpp"

namespace tcprank {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw SchemaError(file.string() + ": cannot open file");
    }
    CsvTable table;
    table.file = file;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            table.header = split_fields(line);
            first = false;
            continue;
        }
        if (line.empty()) continue;
        table.rows.push_back(split_fields(line));
    }
    if (first) {
        throw SchemaError(file.string() + ": missing header row");
    }
    return table;
}

void write_csv(const std::filesystem::path& file,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error(file.string() + ": cannot open for writing");
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(const std::string& field, const std::string& context) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw SchemaError(context + ": not a number: '" + field + "'");
    }
    return v;
}

long long parse_int(const std::string& field, const std::string& context) {
    long long v = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw SchemaError(context + ": not an integer: '" + field + "'");
    }
    return v;
}

}  // namespace tcprank
