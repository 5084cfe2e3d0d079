#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bsim::csv {

// Writes rows of doubles with a header line; values use max-precision
// round-trip formatting so reruns are byte-comparable.
void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows);

// Reads a two-column CSV with a mandatory header line.
std::vector<std::pair<double, double>> read_two_column(const std::filesystem::path& path);

std::string format_double(double v);

} // namespace bsim::csv
