#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace brf {

// Minimal RFC-style CSV: quoted fields may contain the delimiter and
// doubled quotes. One record per line (no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line, char delimiter = ',');
std::string join_csv_line(const std::vector<std::string>& fields, char delimiter = ',');

// Shortest round-trip decimal form (std::to_chars); locale independent,
// byte-stable across runs. All numeric file output goes through this.
std::string format_double(double v);
double parse_double(const std::string& s);  // throws DataError on junk

}  // namespace brf
