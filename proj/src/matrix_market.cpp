#include "kt/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kt::mm {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return true;
  }
  return false;
}

double parse_value(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw FormatError("matrix market: cannot parse value '" + token + "'");
  }
  if (used != token.size()) throw FormatError("matrix market: trailing characters in '" + token + "'");
  if (!std::isfinite(v)) throw FormatError("matrix market: non-finite entry");
  return v;
}

}  // namespace

DenseMatrix read_matrix(std::istream& in) {
  std::string banner;
  if (!std::getline(in, banner)) throw FormatError("matrix market: empty input");
  std::istringstream hs(banner);
  std::string tag, object, format, field, symmetry;
  hs >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw FormatError("matrix market: missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw FormatError("matrix market: unsupported object '" + object + "'");
  if (field != "real" && field != "integer" && field != "double") {
    throw FormatError("matrix market: unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw FormatError("matrix market: unsupported symmetry '" + symmetry + "'");
  }
  const bool symmetric = symmetry == "symmetric";

  std::string line;
  if (!next_data_line(in, line)) throw FormatError("matrix market: missing size line");
  std::istringstream size_line(line);

  if (format == "array") {
    std::size_t rows = 0, cols = 0;
    if (!(size_line >> rows >> cols)) throw FormatError("matrix market: bad array size line");
    if (symmetric && rows != cols) throw FormatError("matrix market: symmetric matrix must be square");
    DenseMatrix a(rows, cols);
    std::string token;
    // Column-major; the symmetric variant stores the lower triangle only.
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = symmetric ? j : 0; i < rows; ++i) {
        if (!(in >> token)) throw FormatError("matrix market: too few array entries");
        const double v = parse_value(token);
        a(i, j) = v;
        if (symmetric) a(j, i) = v;
      }
    }
    return a;
  }

  if (format == "coordinate") {
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (!(size_line >> rows >> cols >> nnz)) throw FormatError("matrix market: bad coordinate size line");
    DenseMatrix a(rows, cols);
    for (std::size_t k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line)) throw FormatError("matrix market: too few coordinate entries");
      std::istringstream es(line);
      std::size_t i = 0, j = 0;
      std::string token;
      if (!(es >> i >> j >> token)) throw FormatError("matrix market: bad coordinate entry '" + line + "'");
      if (i == 0 || j == 0 || i > rows || j > cols) throw FormatError("matrix market: index out of range");
      const double v = parse_value(token);
      a(i - 1, j - 1) += v;
      if (symmetric && i != j) a(j - 1, i - 1) += v;
    }
    return a;
  }
  throw FormatError("matrix market: unsupported format '" + format + "'");
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const DenseMatrix& a, Layout layout, const std::string& comment) {
  if (layout == Layout::Array) {
    out << "%%MatrixMarket matrix array real general\n";
    if (!comment.empty()) out << "% " << comment << '\n';
    out << a.rows() << ' ' << a.cols() << '\n';
    for (std::size_t j = 0; j < a.cols(); ++j) {
      for (std::size_t i = 0; i < a.rows(); ++i) out << format_value(a(i, j)) << '\n';
    }
    return;
  }
  std::size_t nnz = 0;
  for (double v : a.data()) nnz += v != 0.0;
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) out << "% " << comment << '\n';
  out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_value(a(i, j)) << '\n';
    }
  }
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& a, Layout layout,
                  const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix(out, a, layout, comment);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Vector read_vector(std::istream& in) {
  DenseMatrix a = read_matrix(in);
  if (a.cols() != 1 && a.rows() != 1) throw FormatError("matrix market: expected a vector (n×1)");
  return Vector(a.data().begin(), a.data().end());
}

Vector read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_vector(in);
}

void write_vector(std::ostream& out, std::span<const double> v, const std::string& comment) {
  write_matrix(out, DenseMatrix(v.size(), 1, Vector(v.begin(), v.end())), Layout::Array, comment);
}

void write_vector(const std::filesystem::path& path, std::span<const double> v, const std::string& comment) {
  write_matrix(path, DenseMatrix(v.size(), 1, Vector(v.begin(), v.end())), Layout::Array, comment);
}

std::string read_comment(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return {};
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '%') return {};
    auto pos = line.find_first_not_of("% \t");
    return pos == std::string::npos ? std::string{} : line.substr(pos);
  }
  return {};
}

}  // namespace kt::mm
