#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "rtdc/matrix.hpp"

namespace rtdc {

/// Real symmetric tridiagonal matrix stored as its diagonal and
/// off-diagonal. Off-diagonal signs are stored as given.
class SymTridiag {
 public:
  SymTridiag() = default;
  /// Throws ArgumentError unless diag is non-empty and
  /// offdiag.size() == diag.size() - 1.
  SymTridiag(std::vector<double> diag, std::vector<double> offdiag);

  std::size_t size() const noexcept { return diag_.size(); }
  const std::vector<double>& diag() const noexcept { return diag_; }
  const std::vector<double>& offdiag() const noexcept { return offdiag_; }

  Matrix to_dense() const;
  /// Max absolute row sum; an upper bound on the 2-norm.
  double norm_inf() const;

  friend bool operator==(const SymTridiag&, const SymTridiag&) = default;

 private:
  std::vector<double> diag_;
  std::vector<double> offdiag_;
};

/// A = diag(T1, T2, T3) + beta1 w1 w1ᵀ + beta2 w2 w2ᵀ with
/// w1 = e_{k1} + e_{k1+1} and w2 = e_{k1+k2} + e_{k1+k2+1} (1-based).
struct ThreeWaySplit {
  SymTridiag t1, t2, t3;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;

  std::size_t k3() const noexcept { return t3.size(); }
  std::size_t size() const noexcept { return t1.size() + t2.size() + t3.size(); }
};

/// A = diag(T1, T2) + beta w wᵀ with w = e_k + e_{k+1} (1-based).
struct TwoWaySplit {
  SymTridiag t1, t2;
  double beta = 0.0;
  std::size_t k = 0;

  std::size_t size() const noexcept { return t1.size() + t2.size(); }
};

/// Cuts after rows k1 and k1 + k2 (1-based). Throws ArgumentError for
/// invalid positions and DecoupledMatrix if a cut entry is exactly zero.
ThreeWaySplit split_three(const SymTridiag& a, std::size_t k1, std::size_t k2);

/// Cuts after row k (1-based).
TwoWaySplit split_two(const SymTridiag& a, std::size_t k);

/// Inverse of split_three / split_two.
SymTridiag reassemble(const ThreeWaySplit& s);
SymTridiag reassemble(const TwoWaySplit& s);

/// Block sizes k1 = ceil(n/3), k2 = ceil((n - k1)/2); requires n >= 3.
std::pair<std::size_t, std::size_t> default_three_way_cut(std::size_t n);

/// Five-point finite-difference Laplacian on an m x m interior grid,
/// scaled by 1/h² with h = 1/(m+1). Order n = m².
DenseSym laplacian_2d(std::size_t m);

/// Analytic eigenvalues of laplacian_2d(m), ascending.
std::vector<double> laplacian_2d_eigenvalues(std::size_t m);

/// Diagonal and off-diagonal entries uniform in [-1, 1), drawn from a
/// mt19937_64 stream seeded with `seed` (diagonal first).
SymTridiag random_tridiag(std::size_t n, std::uint64_t seed);

/// Copies of the Wilkinson matrix W+ of order `block` (diagonal |i - c|,
/// unit off-diagonal) chained by weak links glue·(1 + u), u uniform in
/// [0, 1) from `seed`. The last copy is truncated to reach order n. Nearly
/// identical blocks give eigenvalue clusters of width about `glue`.
SymTridiag glued_wilkinson(std::size_t n, std::uint64_t seed, std::size_t block = 9,
                           double glue = 1e-12);

struct Tridiagonalization {
  SymTridiag t;
  Matrix q;  ///< Orthogonal, with qᵀ·A·q = t.
};

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Columns whose sub-subdiagonal part is already zero are left untouched,
/// so tridiagonal input comes back unchanged with q = I.
Tridiagonalization householder_tridiagonalize(const DenseSym& a);

}  // namespace rtdc
