#pragma once

#include <string>
#include <vector>

namespace emobench {

// Quotes a field when it contains a comma, quote, or line break (RFC-4180).
std::string csv_escape(const std::string& field);

// Splits one record that is known to contain no embedded line breaks;
// understands quoted fields and doubled quotes.
std::vector<std::string> parse_csv_line(const std::string& line);

}  // namespace emobench
