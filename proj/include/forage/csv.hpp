#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace forage::csv {

// RFC 4180 reader: handles quoted fields with embedded commas, quotes ("")
// and newlines. Rows of differing widths are returned as-is; callers
// validate shape.
std::vector<std::vector<std::string>> read(std::istream& in);
std::vector<std::vector<std::string>> read_file(const std::string& path);

// Writes one row, quoting fields that contain commas, quotes, or newlines.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal rendering that round-trips to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);  // throws ValidationError

}  // namespace forage::csv
