#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

namespace sparsedoa {

// Shortest decimal form that parses back to the same double (to_chars).
std::string format_double(double value);

std::string csv_line(const std::vector<std::string>& cells);

// Writes via a temp file in the target directory plus rename, so readers never
// observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace sparsedoa
