#include "nmfsel/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nmfsel {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      std::string_view field(line.data() + pos,
                             (comma == std::string::npos ? line.size() : comma) - pos);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      if (!field.empty() && field.front() == '+') field.remove_prefix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": bad number '" +
                                     std::string(field) + "'");
      if (!std::isfinite(v))
        throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": non-finite value");
      data.push_back(v);
      ++count;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw Error(Errc::RaggedRows, "line " + std::to_string(line_no) + " has " +
                                        std::to_string(count) + " fields, expected " +
                                        std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw Error(Errc::Parse, "no rows");
  return Matrix::from_rows(rows, cols, std::move(data));
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_matrix_csv(ss.str());
}

std::string format_matrix_csv(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << format_matrix_csv(m);
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace nmfsel
