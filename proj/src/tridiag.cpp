#include "rtdc/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"

namespace rtdc {

SymTridiag::SymTridiag(std::vector<double> diag, std::vector<double> offdiag)
    : diag_(std::move(diag)), offdiag_(std::move(offdiag)) {
  if (diag_.empty()) throw ArgumentError("tridiagonal matrix must have order >= 1");
  if (offdiag_.size() + 1 != diag_.size())
    throw ArgumentError("off-diagonal length must be n - 1 (n = " + std::to_string(diag_.size()) +
                        ", got " + std::to_string(offdiag_.size()) + ")");
}

Matrix SymTridiag::to_dense() const {
  const std::size_t n = size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = diag_[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = offdiag_[i];
    m(i + 1, i) = offdiag_[i];
  }
  return m;
}

double SymTridiag::norm_inf() const {
  double best = 0.0;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(diag_[i]);
    if (i > 0) row += std::abs(offdiag_[i - 1]);
    if (i + 1 < n) row += std::abs(offdiag_[i]);
    best = std::max(best, row);
  }
  return best;
}

namespace {

SymTridiag slice(const SymTridiag& a, std::size_t begin, std::size_t len) {
  std::vector<double> d(a.diag().begin() + begin, a.diag().begin() + begin + len);
  std::vector<double> e(a.offdiag().begin() + begin, a.offdiag().begin() + begin + len - 1);
  return {std::move(d), std::move(e)};
}

void check_cut(const SymTridiag& a, std::size_t pos) {
  if (a.offdiag()[pos] == 0.0)
    throw DecoupledMatrix(pos, "off-diagonal entry " + std::to_string(pos) +
                                   " is zero; the matrix decouples there");
}

SymTridiag with_diag_delta(SymTridiag t, std::size_t i, double delta) {
  auto d = t.diag();
  d[i] += delta;
  return {std::move(d), t.offdiag()};
}

// Concatenates blocks and the coupling entries between them.
SymTridiag join(std::initializer_list<const SymTridiag*> blocks,
                std::initializer_list<double> couplings) {
  std::vector<double> d;
  std::vector<double> e;
  auto c = couplings.begin();
  bool first = true;
  for (const SymTridiag* b : blocks) {
    if (!first) e.push_back(*c++);
    first = false;
    d.insert(d.end(), b->diag().begin(), b->diag().end());
    e.insert(e.end(), b->offdiag().begin(), b->offdiag().end());
  }
  return {std::move(d), std::move(e)};
}

}  // namespace

ThreeWaySplit split_three(const SymTridiag& a, std::size_t k1, std::size_t k2) {
  const std::size_t n = a.size();
  if (k1 < 1 || k2 < 1 || k1 + k2 > n - 1 || n < 3)
    throw ArgumentError("split_three: need 1 <= k1, k1 + 1 <= k1 + k2 <= n - 1");
  check_cut(a, k1 - 1);
  check_cut(a, k1 + k2 - 1);

  ThreeWaySplit s;
  s.k1 = k1;
  s.k2 = k2;
  s.beta1 = a.offdiag()[k1 - 1];
  s.beta2 = a.offdiag()[k1 + k2 - 1];

  s.t1 = with_diag_delta(slice(a, 0, k1), k1 - 1, -s.beta1);
  SymTridiag t2 = with_diag_delta(slice(a, k1, k2), 0, -s.beta1);
  s.t2 = with_diag_delta(std::move(t2), k2 - 1, -s.beta2);
  s.t3 = with_diag_delta(slice(a, k1 + k2, n - k1 - k2), 0, -s.beta2);
  return s;
}

TwoWaySplit split_two(const SymTridiag& a, std::size_t k) {
  const std::size_t n = a.size();
  if (n < 2 || k < 1 || k > n - 1) throw ArgumentError("split_two: need 1 <= k <= n - 1");
  check_cut(a, k - 1);

  TwoWaySplit s;
  s.k = k;
  s.beta = a.offdiag()[k - 1];
  s.t1 = with_diag_delta(slice(a, 0, k), k - 1, -s.beta);
  s.t2 = with_diag_delta(slice(a, k, n - k), 0, -s.beta);
  return s;
}

SymTridiag reassemble(const ThreeWaySplit& s) {
  SymTridiag t1 = with_diag_delta(s.t1, s.t1.size() - 1, s.beta1);
  // Undo in reverse order so a 1x1 middle block restores its entry exactly.
  SymTridiag t2 = with_diag_delta(s.t2, s.t2.size() - 1, s.beta2);
  t2 = with_diag_delta(std::move(t2), 0, s.beta1);
  SymTridiag t3 = with_diag_delta(s.t3, 0, s.beta2);
  return join({&t1, &t2, &t3}, {s.beta1, s.beta2});
}

SymTridiag reassemble(const TwoWaySplit& s) {
  SymTridiag t1 = with_diag_delta(s.t1, s.t1.size() - 1, s.beta);
  SymTridiag t2 = with_diag_delta(s.t2, 0, s.beta);
  return join({&t1, &t2}, {s.beta});
}

std::pair<std::size_t, std::size_t> default_three_way_cut(std::size_t n) {
  if (n < 3) throw ArgumentError("three-way cut needs n >= 3");
  const std::size_t k1 = (n + 2) / 3;
  const std::size_t k2 = (n - k1 + 1) / 2;
  return {k1, k2};
}

DenseSym laplacian_2d(std::size_t m) {
  if (m < 1) throw ArgumentError("laplacian_2d: grid size must be >= 1");
  const double h = 1.0 / static_cast<double>(m + 1);
  const double s = 1.0 / (h * h);
  const std::size_t n = m * m;
  Matrix a(n, n);
  for (std::size_t bi = 0; bi < m; ++bi) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t r = bi * m + i;
      a(r, r) = 4.0 * s;
      if (i + 1 < m) a(r, r + 1) = a(r + 1, r) = -s;
      if (bi + 1 < m) a(r, r + m) = a(r + m, r) = -s;
    }
  }
  return DenseSym(std::move(a));
}

std::vector<double> laplacian_2d_eigenvalues(std::size_t m) {
  const double h = 1.0 / static_cast<double>(m + 1);
  std::vector<double> ev;
  ev.reserve(m * m);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      ev.push_back((4.0 - 2.0 * std::cos(static_cast<double>(i) * std::numbers::pi * h) -
                    2.0 * std::cos(static_cast<double>(j) * std::numbers::pi * h)) /
                   (h * h));
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace {
// 53 random bits mapped to [0, 1); spelled out so the stream does not depend
// on the standard library's distribution implementation.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }
}  // namespace

SymTridiag random_tridiag(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("random_tridiag: order must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> d(n), e(n - 1);
  for (double& x : d) x = 2.0 * unit_draw(rng) - 1.0;
  for (double& x : e) x = 2.0 * unit_draw(rng) - 1.0;
  return SymTridiag(std::move(d), std::move(e));
}

SymTridiag glued_wilkinson(std::size_t n, std::uint64_t seed, std::size_t block, double glue) {
  if (n == 0) throw ArgumentError("glued_wilkinson: order must be >= 1");
  if (block == 0) throw ArgumentError("glued_wilkinson: block size must be >= 1");
  std::mt19937_64 rng(seed);
  const double centre = 0.5 * static_cast<double>(block - 1);
  std::vector<double> d(n), e(n - 1);
  for (std::size_t i = 0; i < n; ++i) d[i] = std::abs(static_cast<double>(i % block) - centre);
  for (std::size_t i = 0; i + 1 < n; ++i)
    e[i] = (i + 1) % block == 0 ? glue * (1.0 + unit_draw(rng)) : 1.0;
  return SymTridiag(std::move(d), std::move(e));
}

Tridiagonalization householder_tridiagonalize(const DenseSym& input) {
  const std::size_t n = input.size();
  Matrix a = input.matrix();
  Matrix q = Matrix::identity(n);
  std::vector<double> v(n), p(n), w(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    double tail = 0.0;
    for (std::size_t i = k + 2; i < n; ++i) tail += a(i, k) * a(i, k);
    if (tail == 0.0) continue;

    const double x0 = a(k + 1, k);
    const double norm = std::sqrt(x0 * x0 + tail);
    const double alpha = x0 > 0.0 ? -norm : norm;
    v[0] = x0 - alpha;
    for (std::size_t i = 1; i < len; ++i) v[i] = a(k + 1 + i, k);
    double vtv = v[0] * v[0] + tail;
    const double tau = 2.0 / vtv;

    // p = tau * A22 * v, then w = p - (tau/2)(vᵀp) v; A22 -= v wᵀ + w vᵀ.
    for (std::size_t i = 0; i < len; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < len; ++j) s += a(k + 1 + i, k + 1 + j) * v[j];
      p[i] = tau * s;
    }
    double vtp = 0.0;
    for (std::size_t i = 0; i < len; ++i) vtp += v[i] * p[i];
    const double kcoef = 0.5 * tau * vtp;
    for (std::size_t i = 0; i < len; ++i) w[i] = p[i] - kcoef * v[i];
    for (std::size_t j = 0; j < len; ++j)
      for (std::size_t i = 0; i < len; ++i)
        a(k + 1 + i, k + 1 + j) -= v[i] * w[j] + w[i] * v[j];

    a(k + 1, k) = alpha;
    a(k, k + 1) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = a(k, i) = 0.0;

    // q <- q * H on columns k+1..n-1.
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < len; ++j) s += q(r, k + 1 + j) * v[j];
      s *= tau;
      for (std::size_t j = 0; j < len; ++j) q(r, k + 1 + j) -= s * v[j];
    }
    flops::count({.adds = 4 * len * len + 2 * n * len, .muls = 4 * len * len + 2 * n * len,
                  .divs = 1, .sqrts = 1});
  }

  std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = a(i + 1, i);
  return {SymTridiag(std::move(d), std::move(e)), std::move(q)};
}

}  // namespace rtdc
