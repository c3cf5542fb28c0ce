#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairswap::csv {

using Row = std::vector<std::string>;

// Parses RFC-4180 style text: comma separated, optional double-quoted fields
// with "" as the escaped quote, LF or CRLF record terminators. A trailing
// empty line is ignored.
std::vector<Row> parse(std::string_view text);

std::vector<Row> read_file(const std::string& path);

// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict full-string parse; false on any trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);

}  // namespace fairswap::csv
