#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace linerank::csv {

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format(double value);

/// Splits one CSV record on commas (no quoting support; none of our schemas need it).
std::vector<std::string_view> split(std::string_view line);

double parse_double(std::string_view token);

}  // namespace linerank::csv
