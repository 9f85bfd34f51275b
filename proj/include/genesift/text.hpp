#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genesift {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Full-consume numeric parsers; nullopt when the text is not a number.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that round-trips the double exactly.
std::string fmt_double(double v);

// Fixed decimals, e.g. fmt_fixed(97.238, 2) == "97.24".
std::string fmt_fixed(double v, int decimals);

}  // namespace genesift
