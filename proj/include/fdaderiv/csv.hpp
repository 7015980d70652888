#pragma once

#include <string>
#include <vector>

namespace fdaderiv {

/// Shortest round-trip decimal representation of a double; output is
/// reproducible byte-for-byte for identical inputs.
std::string format_double(double value);

/// Splits one CSV line on commas (no quoting; our files never need it).
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a double, reporting 1-based row/column on failure.
double parse_csv_double(const std::string& field, std::size_t row, std::size_t col);

} // namespace fdaderiv
