#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sqz/errors.hpp"

namespace sqz::io {

// Shortest round-trip decimal form (17 significant digits): parsing the text
// recovers the exact double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::pair<std::string, std::string>> metadata; // from "# key: value" lines
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Dialect: comma separator, '.' decimal point, '#' comment lines, UTF-8,
// one header row of column names, numbers at 17 significant digits.
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

} // namespace sqz::io
