#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tcprank {

// Minimal strict CSV: UTF-8, comma separator, header row required, no quoting
// (fields must not contain commas or newlines), '.' decimal separator.
struct CsvTable {
    std::filesystem::path file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // row i came from line i+2

    // 1-based line number of data row i, for error messages.
    std::size_t line_of(std::size_t row) const { return row + 2; }
};

CsvTable read_csv(const std::filesystem::path& file);

void write_csv(const std::filesystem::path& file,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Strict double parse; `context` names the file/record for the error message.
double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

}  // namespace tcprank
