#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "kt/linalg.hpp"

namespace kt::mm {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Layout { Array, Coordinate };

/// Reads `%%MatrixMarket matrix {array|coordinate} {real|integer} {general|symmetric}`.
/// Comment lines are skipped; non-finite entries are rejected.
DenseMatrix read_matrix(std::istream& in);
DenseMatrix read_matrix(const std::filesystem::path& path);

/// Array layout values are written column-major, coordinate layout lists
/// nonzeros row by row. Values use 17 significant digits.
void write_matrix(std::ostream& out, const DenseMatrix& a, Layout layout = Layout::Array,
                  const std::string& comment = {});
void write_matrix(const std::filesystem::path& path, const DenseMatrix& a, Layout layout = Layout::Array,
                  const std::string& comment = {});

/// Vectors are stored as n×1 matrices.
Vector read_vector(std::istream& in);
Vector read_vector(const std::filesystem::path& path);
void write_vector(std::ostream& out, std::span<const double> v, const std::string& comment = {});
void write_vector(const std::filesystem::path& path, std::span<const double> v, const std::string& comment = {});

/// First `%`-comment line after the banner, without the leading '%' and blanks.
std::string read_comment(const std::filesystem::path& path);

}  // namespace kt::mm
