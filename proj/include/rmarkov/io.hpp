#pragma once

// Matrix text format used by fixtures and the CLI:
//
//   rows cols
//   a11 a12 ...
//   ...
//
// Entries are whitespace separated decimals; complex entries use "a+bi".
// All number formatting here is locale independent (dot decimal separator).

#include "rmarkov/linalg.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace rmarkov {

struct ParsedMatrix {
  Eigen::MatrixXcd entries;
  bool is_complex = false;

  Eigen::MatrixXd real() const { return entries.real(); }
};

/// Shortest round-trip decimal with at most 17 significant digits.
std::string format_double(double value);

/// "a", "bi", "a+bi", "a-bi", "i", "-i".
Complex parse_complex(std::string_view token);
std::string format_complex(const Complex& value);

/// Throws std::invalid_argument on malformed input or non-finite entries.
ParsedMatrix read_matrix(std::istream& in);
ParsedMatrix read_matrix_file(const std::string& path);

void write_matrix(std::ostream& out, const Eigen::MatrixXd& a);
void write_matrix(std::ostream& out, const Eigen::MatrixXcd& a);

}  // namespace rmarkov
