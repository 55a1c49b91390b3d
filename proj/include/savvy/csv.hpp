#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace savvy::csv {

// Splits one CSV line on commas. Double-quoted fields may contain commas and
// "" escapes; surrounding whitespace is kept as-is.
std::vector<std::string> split_line(std::string_view line);

// Splits text into lines, accepting \n and \r\n. A trailing empty line is dropped.
std::vector<std::string_view> lines(std::string_view text);

// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string trim(std::string_view s);

// Shortest representation that round-trips through strtod.
std::string format_double(double value);

}  // namespace savvy::csv
