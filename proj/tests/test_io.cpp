#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "sqz/errors.hpp"
#include "sqz/io.hpp"

using namespace sqz;

TEST_CASE("format_double emits 17-significant-digit text that parses back exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.84, 1e-300, 6.62607015e-34, 12345.6789012345678,
                     0.047955614735802676}) {
        const std::string text = io::format_double(v);
        CHECK(std::stod(text) == v);
    }
    CHECK(io::format_double(0.0) == "0");
    const std::string neg_zero = io::format_double(-0.0);
    CHECK(std::signbit(std::stod(neg_zero)));
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(0.1) == "0.10000000000000001");
}

static io::CsvTable sample_table() {
    io::CsvTable t;
    t.metadata = {{"v1_db", "-2.84"}, {"note", "µ±² round trip"}};
    t.columns = {"f_hz", "v1_db", "v2_db"};
    t.rows = {
        {1e5, -11.493264, 16.00321},
        {5e6, -0.1, 0.1},
        {3e8, 1.0 / 3.0, -0.0},
    };
    return t;
}

TEST_CASE("CSV stream round trip preserves metadata, columns, and exact values") {
    const io::CsvTable t = sample_table();
    std::ostringstream out;
    io::write_csv(out, t);
    const std::string text = out.str();
    CHECK(text.find("# v1_db: -2.84\n") != std::string::npos);
    CHECK(text.find("f_hz,v1_db,v2_db\n") != std::string::npos);

    std::istringstream in(text);
    const io::CsvTable back = io::read_csv(in);
    CHECK(back.columns == t.columns);
    CHECK(back.metadata == t.metadata);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < t.columns.size(); ++j)
            CHECK(back.rows[i][j] == t.rows[i][j]); // bitwise: 17 digits round trip
}

TEST_CASE("CSV file round trip") {
    const auto path =
        (std::filesystem::temp_directory_path() / "sqz_io_roundtrip.csv").string();
    const io::CsvTable t = sample_table();
    io::write_csv_file(path, t);
    const io::CsvTable back = io::read_csv_file(path);
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
    std::remove(path.c_str());
}

TEST_CASE("CSV reader rejects malformed input with the line named") {
    std::istringstream empty("");
    CHECK_THROWS_AS(io::read_csv(empty), validation_error);

    std::istringstream short_row("a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(io::read_csv(short_row), doctest::Contains("line"), validation_error);

    std::istringstream bad_number("a,b\n1,green\n");
    CHECK_THROWS_AS(io::read_csv(bad_number), validation_error);

    CHECK_THROWS_AS(io::read_csv_file("/nonexistent/sqz/file.csv"), validation_error);
    CHECK_THROWS_AS(io::write_csv_file("/nonexistent/sqz/file.csv", sample_table()),
                    validation_error);
}
