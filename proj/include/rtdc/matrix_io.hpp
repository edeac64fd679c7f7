#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "rtdc/matrix.hpp"
#include "rtdc/tridiag.hpp"

namespace rtdc {

using MatrixFile = std::variant<SymTridiag, DenseSym>;

// Plain-text matrix format:
//   symtridiag n            densesym n
//   d1 ... dn               a11 ... a1n
//   e1 ... e(n-1)           ...
//                           an1 ... ann
// Entries are written with 17 significant digits, which round-trips doubles.

/// Throws ParseError (with 1-based line number) on malformed text and
/// ValidationError for a non-symmetric dense matrix.
MatrixFile parse_matrix(std::istream& in);
void format_matrix(const MatrixFile& m, std::ostream& out);

/// File wrappers; failures to open raise IoError naming the path.
MatrixFile read_matrix(const std::filesystem::path& path);
void write_matrix(const MatrixFile& m, const std::filesystem::path& path);

/// Formats a double with 17 significant digits.
std::string format_double(double x);

}  // namespace rtdc
