#pragma once

#include <string>
#include <vector>

namespace wkb::csv {

/// Shortest round-trippable text for a double; "inf"/"-inf"/"nan" for
/// non-finite values.
std::string num(double x);

/// Joins cells with commas and terminates the line.
std::string row(const std::vector<std::string>& cells);

/// Writes text to a file, throwing Error(Io) on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace wkb::csv
