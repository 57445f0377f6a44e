#pragma once

#include <filesystem>
#include <string>

#include "nmfsel/matrix.hpp"

namespace nmfsel {

/// Plain numeric CSV: one matrix row per line, no header, '.' decimal point.
/// Values are written with 17 significant digits so a write/read cycle is
/// exact.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);

Matrix parse_matrix_csv(const std::string& text);
std::string format_matrix_csv(const Matrix& m);

/// %.17g, locale-independent.
std::string format_double(double x);

}  // namespace nmfsel
