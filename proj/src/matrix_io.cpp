#include "rtdc/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "rtdc/errors.hpp"

namespace rtdc {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

double parse_double(const std::string& tok, std::size_t line) {
  double x = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) throw ParseError(line, "not a number: '" + tok + "'");
  if (!std::isfinite(x)) throw ParseError(line, "entry is not finite: '" + tok + "'");
  return x;
}

std::vector<double> parse_row(const std::string& text, std::size_t line, std::size_t expected) {
  auto toks = tokens(text);
  if (toks.size() != expected)
    throw ParseError(line, "expected " + std::to_string(expected) + " entries, found " +
                               std::to_string(toks.size()));
  std::vector<double> row;
  row.reserve(expected);
  for (const auto& t : toks) row.push_back(parse_double(t, line));
  return row;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Returns false at end of input.
  bool next(std::string& out) {
    if (!std::getline(in_, out)) return false;
    ++line_;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

MatrixFile parse_matrix(std::istream& in) {
  LineReader reader(in);
  std::string text;
  if (!reader.next(text)) throw ParseError(1, "empty input");
  auto header = tokens(text);
  if (header.size() != 2) throw ParseError(1, "header must be '<kind> <n>'");
  const std::string& kind = header[0];
  std::size_t n = 0;
  {
    const auto& t = header[1];
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw ParseError(1, "order must be a non-negative integer, got '" + t + "'");
  }
  if (n == 0) throw ParseError(1, "order must be >= 1");

  auto require_line = [&](const char* what) {
    if (!reader.next(text))
      throw ParseError(reader.line() + 1, std::string("unexpected end of input, expected ") + what);
  };

  MatrixFile result;
  if (kind == "symtridiag") {
    require_line("diagonal");
    auto d = parse_row(text, reader.line(), n);
    std::vector<double> e;
    if (n > 1) {
      require_line("off-diagonal");
      e = parse_row(text, reader.line(), n - 1);
    } else if (reader.next(text) && !tokens(text).empty()) {
      throw ParseError(reader.line(), "order 1 has no off-diagonal entries");
    }
    result = SymTridiag(std::move(d), std::move(e));
  } else if (kind == "densesym") {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      require_line("matrix row");
      auto row = parse_row(text, reader.line(), n);
      for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
    }
    result = DenseSym(std::move(m));
  } else {
    throw ParseError(1, "unknown matrix kind '" + kind + "'");
  }

  while (reader.next(text))
    if (!tokens(text).empty()) throw ParseError(reader.line(), "unexpected trailing content");
  return result;
}

void format_matrix(const MatrixFile& m, std::ostream& out) {
  auto write_row = [&](auto&& values) {
    bool first = true;
    for (double x : values) {
      if (!first) out << ' ';
      out << format_double(x);
      first = false;
    }
    out << '\n';
  };
  if (const auto* t = std::get_if<SymTridiag>(&m)) {
    out << "symtridiag " << t->size() << '\n';
    write_row(t->diag());
    write_row(t->offdiag());
  } else {
    const auto& a = std::get<DenseSym>(m);
    out << "densesym " << a.size() << '\n';
    std::vector<double> row(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < a.size(); ++j) row[j] = a(i, j);
      write_row(row);
    }
  }
}

MatrixFile read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_matrix(in);
}

void write_matrix(const MatrixFile& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  format_matrix(m, out);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace rtdc
