#include "sqz/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sqz::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const CsvTable& table) {
    for (const auto& [key, value] : table.metadata) out << "# " << key << ": " << value << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ",";
        out << table.columns[c];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ",";
            out << format_double(row[c]);
        }
        out << "\n";
    }
}

void write_csv_file(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open for writing: " + path);
    write_csv(out, table);
    if (!out.good()) throw validation_error("write failed: " + path);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

} // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::string body = trim(t.substr(1));
            const std::size_t colon = body.find(':');
            if (colon != std::string::npos)
                table.metadata.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
            else if (!body.empty())
                table.metadata.emplace_back(body, "");
            continue;
        }
        if (!have_header) {
            for (const auto& c : split(t, ',')) table.columns.push_back(trim(c));
            have_header = true;
            continue;
        }
        const auto cells = split(t, ',');
        if (cells.size() != table.columns.size()) {
            std::ostringstream os;
            os << "CSV line " << lineno << ": expected " << table.columns.size()
               << " cells, found " << cells.size();
            throw validation_error(os.str());
        }
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            double value = 0.0;
            const auto* first = cell.data();
            const auto* last = cell.data() + cell.size();
            const auto res = std::from_chars(first, last, value);
            if (res.ec != std::errc{} || res.ptr != last) {
                std::ostringstream os;
                os << "CSV line " << lineno << ": cell '" << cell << "' is not a number";
                throw validation_error(os.str());
            }
            row[c] = value;
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw validation_error("CSV input has no header row");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open for reading: " + path);
    return read_csv(in);
}

} // namespace sqz::io
