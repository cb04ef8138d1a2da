#pragma once

#include <span>
#include <string>
#include <vector>

namespace footif {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Space-separated `format_double` of each element.
std::string format_doubles(std::span<const double> values);

/// Parses a single double; throws Error(ParseError) on trailing garbage.
double parse_double(const std::string& text);

/// Parses a whitespace-separated list of doubles.
std::vector<double> parse_doubles(const std::string& text);

}  // namespace footif
