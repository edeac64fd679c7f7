#include "dc_common.hpp"

#include <algorithm>
#include <numeric>

#include "rtdc/errors.hpp"

namespace rtdc::detail {

Matrix block_diag_times(std::span<const Matrix* const> blocks, const Matrix& x) {
  std::size_t total = 0;
  for (const Matrix* b : blocks) total += b->rows();
  if (total != x.rows()) throw ArgumentError("block_diag_times: size mismatch");
  Matrix out(x.rows(), x.cols());
  std::uint64_t work = 0;
  std::size_t offset = 0;
  for (const Matrix* b : blocks) {
    const std::size_t k = b->rows();
    for (std::size_t j = 0; j < x.cols(); ++j) {
      auto dst = out.col(j);
      for (std::size_t l = 0; l < k; ++l) {
        const double y = x(offset + l, j);
        if (y == 0.0) continue;
        auto src = b->col(l);
        for (std::size_t i = 0; i < k; ++i) dst[offset + i] += src[i] * y;
        work += k;
      }
    }
    offset += k;
  }
  flops::count({.adds = work, .muls = work});
  return out;
}

std::vector<std::size_t> zero_offdiag_positions(const SymTridiag& t) {
  std::vector<std::size_t> out;
  const auto& e = t.offdiag();
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] == 0.0) out.push_back(i);
  return out;
}

SymTridiag sub_tridiag(const SymTridiag& t, std::size_t first, std::size_t count) {
  const auto& d = t.diag();
  const auto& e = t.offdiag();
  std::vector<double> dd(d.begin() + first, d.begin() + first + count);
  std::vector<double> ee(e.begin() + first, e.begin() + first + count - 1);
  return SymTridiag(std::move(dd), std::move(ee));
}

SpectralDecomposition assemble_sorted(std::vector<double> values, Matrix vectors) {
  SpectralDecomposition dec;
  dec.eigenvalues = std::move(values);
  dec.vectors = std::move(vectors);
  sort_decomposition(dec);
  normalize_signs(dec.vectors);
  return dec;
}

}  // namespace rtdc::detail
