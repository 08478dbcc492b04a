#pragma once

#include <charconv>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "uno/matrix.hpp"

namespace uno::io {

// Exact round-trip text encoding of a double.
inline std::string hex(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  if (ec != std::errc{}) throw std::runtime_error("hex: formatting failed");
  return std::string(buf, end);
}

inline double parse_hex(std::string_view s) {
  double v = 0.0;
  bool neg = false;
  if (!s.empty() && s.front() == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("malformed hex float '" + std::string(s) + "'");
  return neg ? -v : v;
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? " " : "") << hex(m(r, c));
    os << '\n';
  }
}

inline Matrix read_matrix(std::istream& is, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  std::string tok;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(is >> tok)) throw std::runtime_error("unexpected end of matrix data");
    m.data()[i] = parse_hex(tok);
  }
  return m;
}

// Reads "<keyword> <rest>" and checks the keyword.
inline std::string expect_line(std::istream& is, std::string_view keyword) {
  std::string line;
  while (std::getline(is, line) && line.empty()) {
  }
  if (line.rfind(keyword, 0) != 0)
    throw std::runtime_error("expected '" + std::string(keyword) + "', got '" + line + "'");
  auto rest = line.substr(keyword.size());
  if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
  return rest;
}

}  // namespace uno::io
