#include "rtdc/ortho_transform.hpp"

#include <algorithm>

#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"

namespace rtdc {

std::size_t OrthoTransform::givens_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(ops_.begin(), ops_.end(), [](const auto& op) {
    return std::holds_alternative<Givens>(op);
  }));
}

void OrthoTransform::apply_ops(std::span<double> v) const {
  std::uint64_t adds = 0;
  std::uint64_t muls = 0;
  std::vector<double> tmp;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    if (const auto* g = std::get_if<Givens>(&*it)) {
      const double na = v[g->a];
      const double nb = v[g->b];
      v[g->a] = g->c * na + g->s * nb;
      v[g->b] = -g->s * na + g->c * nb;
      adds += 2;
      muls += 4;
    } else {
      const auto& b = std::get<Block>(*it);
      const std::size_t m = b.idx.size();
      tmp.assign(m, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        const double y = v[b.idx[j]];
        if (y == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i) tmp[i] += b.u(i, j) * y;
      }
      for (std::size_t i = 0; i < m; ++i) v[b.idx[i]] = tmp[i];
      adds += m * m;
      muls += m * m;
    }
  }
  flops::count({.adds = adds, .muls = muls});
}

std::vector<double> OrthoTransform::apply(std::span<const double> working) const {
  if (working.size() != size()) throw ArgumentError("OrthoTransform::apply: size mismatch");
  std::vector<double> w(working.begin(), working.end());
  apply_ops(w);
  std::vector<double> x(size());
  for (std::size_t i = 0; i < size(); ++i) x[perm_[i]] = w[i];
  return x;
}

Matrix OrthoTransform::apply(const Matrix& y) const {
  if (y.rows() != size()) throw ArgumentError("OrthoTransform::apply: row count mismatch");
  Matrix x(size(), y.cols());
  std::vector<double> w(size());
  for (std::size_t j = 0; j < y.cols(); ++j) {
    auto src = y.col(j);
    std::copy(src.begin(), src.end(), w.begin());
    apply_ops(w);
    auto dst = x.col(j);
    for (std::size_t i = 0; i < size(); ++i) dst[perm_[i]] = w[i];
  }
  return x;
}

std::vector<double> OrthoTransform::column(std::size_t i) const {
  std::vector<double> e(size(), 0.0);
  e.at(i) = 1.0;
  return apply(e);
}

}  // namespace rtdc
