#pragma once

#include <filesystem>
#include <iosfwd>

#include "svshrink/spectral.hpp"

namespace svshrink {

// CSV of decimal floats, one row per line. Values are written with 17
// significant digits so a write/read cycle is exact for IEEE doubles.
Matrix read_matrix(const std::filesystem::path& path);
Matrix parse_matrix(std::istream& in);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
void format_matrix(std::ostream& out, const Matrix& m);

// Shortest of %.17g; shared by every CSV writer in the project.
std::string format_double(double v);

}  // namespace svshrink
