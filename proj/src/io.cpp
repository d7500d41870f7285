#include "rmarkov/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rmarkov {
namespace {

double parse_real(std::string_view text, std::string_view token) {
  if (text.empty() || text == "+") return 1.0;
  if (text == "-") return -1.0;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("malformed number: '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buffer.data(), ptr);
}

Complex parse_complex(std::string_view token) {
  if (token.empty()) throw std::invalid_argument("empty number token");
  if (token.back() != 'i') {
    return {parse_real(token, token), 0.0};
  }
  const std::string_view body = token.substr(0, token.size() - 1);
  std::size_t split = std::string_view::npos;
  for (std::size_t pos = body.size(); pos-- > 1;) {
    const char c = body[pos];
    if ((c == '+' || c == '-') && body[pos - 1] != 'e' && body[pos - 1] != 'E') {
      split = pos;
      break;
    }
  }
  if (split == std::string_view::npos) {
    if (body.empty()) return {0.0, 1.0};
    return {0.0, parse_real(body, token)};
  }
  return {parse_real(body.substr(0, split), token), parse_real(body.substr(split), token)};
}

std::string format_complex(const Complex& value) {
  std::string out = format_double(value.real());
  const std::string im = format_double(value.imag());
  if (im.front() != '-') out += '+';
  out += im;
  out += 'i';
  return out;
}

ParsedMatrix read_matrix(std::istream& in) {
  long rows = 0;
  long cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1) {
    throw std::invalid_argument("matrix header must be 'rows cols' with both >= 1");
  }
  ParsedMatrix parsed;
  parsed.entries.resize(rows, cols);
  std::string token;
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> token)) {
        throw std::invalid_argument("matrix body ended early at entry (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
      }
      const Complex value = parse_complex(token);
      if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        throw std::invalid_argument("non-finite matrix entry '" + token + "'");
      }
      if (value.imag() != 0.0 || token.back() == 'i') parsed.is_complex = true;
      parsed.entries(i, j) = value;
    }
  }
  if (in >> token) {
    throw std::invalid_argument("trailing data after matrix body: '" + token + "'");
  }
  return parsed;
}

ParsedMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open matrix file '" + path + "'");
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_complex(a(i, j));
    }
    out << '\n';
  }
}

}  // namespace rmarkov
