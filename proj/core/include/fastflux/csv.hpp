#pragma once

#include <string>
#include <vector>

namespace fastflux {

// Shortest round-trip decimal; scientific notation outside [1e-6, 1e6); "nan", "inf", "-inf".
std::string format_number(double x);

// Joins cells with commas and ends the row with a newline.
std::string csv_row(const std::vector<std::string>& cells);

}  // namespace fastflux
