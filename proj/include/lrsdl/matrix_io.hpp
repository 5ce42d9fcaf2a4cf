#pragma once

#include "lrsdl/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lrsdl {

enum class MatrixFormat { binary, csv };

/// Reads an LMX binary file (detected by its "LMX " magic) or a headerless CSV.
/// Throws FormatError, DataError (NaN/Inf), DimensionError (size mismatch) or IoError.
Matrix load_matrix(const std::filesystem::path& path);

/// LMX: "LMX <rows> <cols>\n" then rows*cols little-endian doubles, row-major.
/// CSV: one row per line, 17 significant digits so doubles round-trip.
void save_matrix(const Matrix& M, const std::filesystem::path& path,
                 MatrixFormat format = MatrixFormat::binary);

Matrix parse_csv_matrix(const std::string& text);
std::string format_csv_matrix(const Matrix& M);

/// One integer per line.
std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);

/// Shortest-exact-enough text for a double (17 significant digits).
std::string format_double(double v);

}  // namespace lrsdl
