#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace emovox::csv {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::vector<std::string> split_line(std::string_view line);

}  // namespace emovox::csv
