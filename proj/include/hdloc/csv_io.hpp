#pragma once

#include "hdloc/sample.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hdloc {

// Comma-separated numeric table: a header row of variable names followed by
// one observation per line.
struct CsvTable {
  std::vector<std::string> header;
  Panel values;
};

CsvTable read_csv_table(std::istream& in);
CsvTable read_csv_table(const std::filesystem::path& path);

void write_csv_table(std::ostream& out, const std::vector<std::string>& header, const Panel& values);

// Shortest decimal text that round-trips the double.
std::string format_double(double value);

}  // namespace hdloc
