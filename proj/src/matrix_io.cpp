#include "lrsdl/matrix_io.hpp"

#include "lrsdl/errors.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lrsdl {

namespace {

constexpr char kMagic[] = "LMX ";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("csv line " + std::to_string(line) + ": cannot parse '" +
                      std::string(tok) + "'");
  }
  if (!std::isfinite(v)) {
    throw DataError("csv line " + std::to_string(line) + ": non-finite value");
  }
  return v;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xFF);
    return r;
  }
  return v;
}

Matrix parse_lmx(const std::string& bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string::npos) throw FormatError("LMX: missing header terminator");
  std::istringstream header(bytes.substr(4, eol - 4));
  long long rows = -1;
  long long cols = -1;
  std::string rest;
  if (!(header >> rows >> cols) || (header >> rest) || rows < 0 || cols < 0) {
    throw FormatError("LMX: malformed header '" + bytes.substr(0, eol) + "'");
  }
  const std::size_t payload = bytes.size() - eol - 1;
  const auto expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 8;
  if (payload != expected) {
    throw DimensionError("LMX: header declares " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " but payload holds " + std::to_string(payload) +
                         " bytes");
  }
  Matrix M(rows, cols);
  const char* p = bytes.data() + eol + 1;
  for (long long i = 0; i < rows; ++i) {
    for (long long j = 0; j < cols; ++j) {
      std::uint64_t raw = 0;
      std::memcpy(&raw, p, 8);
      p += 8;
      const double v = std::bit_cast<double>(to_little_endian(raw));
      if (!std::isfinite(v)) throw DataError("LMX: non-finite entry");
      M(i, j) = v;
    }
  }
  return M;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix parse_csv_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      row.push_back(parse_double(body.substr(start, comma - start), lineno));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionError("csv line " + std::to_string(lineno) + ": expected " +
                           std::to_string(rows.front().size()) + " values, got " +
                           std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Matrix M(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) M(i, j) = rows[i][j];
  }
  return M;
}

std::string format_csv_matrix(const Matrix& M) {
  std::string out;
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(M(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix load_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.compare(0, 4, kMagic) == 0) return parse_lmx(bytes);
  return parse_csv_matrix(bytes);
}

void save_matrix(const Matrix& M, const std::filesystem::path& path, MatrixFormat format) {
  if (!all_finite(M)) throw DataError("save_matrix: non-finite entries");
  if (format == MatrixFormat::csv) {
    write_file(path, format_csv_matrix(M));
    return;
  }
  std::string bytes = std::string(kMagic) + std::to_string(M.rows()) + " " +
                      std::to_string(M.cols()) + "\n";
  bytes.reserve(bytes.size() + static_cast<std::size_t>(M.size()) * 8);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      const std::uint64_t raw = to_little_endian(std::bit_cast<std::uint64_t>(M(i, j)));
      char buf[8];
      std::memcpy(buf, &raw, 8);
      bytes.append(buf, 8);
    }
  }
  write_file(path, bytes);
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<int> labels;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty()) continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (ec != std::errc() || ptr != body.data() + body.size()) {
      throw FormatError("labels line " + std::to_string(lineno) + ": not an integer");
    }
    if (v < 1) throw DataError("labels line " + std::to_string(lineno) + ": label < 1");
    labels.push_back(v);
  }
  return labels;
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::string out;
  for (int l : labels) {
    out += std::to_string(l);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace lrsdl
