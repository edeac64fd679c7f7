#include "rtdc/qr_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"

namespace rtdc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// One implicit Wilkinson-shifted QR sweep on the unreduced block [lo, hi].
void qr_sweep(std::vector<double>& d, std::vector<double>& e, std::size_t lo, std::size_t hi,
              Matrix* q) {
  const double dd = 0.5 * (d[hi - 1] - d[hi]);
  const double b = e[hi - 1];
  const double root = std::hypot(dd, b);
  const double mu = d[hi] - b * b / (dd + (dd >= 0.0 ? root : -root));

  double x = d[lo] - mu;
  double z = e[lo];
  const std::size_t rows = q != nullptr ? q->rows() : 0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double r = std::hypot(x, z);
    double c = 1.0;
    double s = 0.0;
    if (r != 0.0) {
      c = x / r;
      s = -z / r;
    }
    if (k > lo) e[k - 1] = r;

    const double a = d[k];
    const double bk = e[k];
    const double cc = d[k + 1];
    const double c2 = c * c;
    const double s2 = s * s;
    const double cs = c * s;
    d[k] = c2 * a - 2.0 * cs * bk + s2 * cc;
    e[k] = cs * (a - cc) + (c2 - s2) * bk;
    d[k + 1] = s2 * a + 2.0 * cs * bk + c2 * cc;
    if (k + 1 < hi) {
      x = e[k];
      z = -s * e[k + 1];
      e[k + 1] *= c;
    }
    if (q != nullptr) {
      auto qk = q->col(k);
      auto qk1 = q->col(k + 1);
      for (std::size_t i = 0; i < rows; ++i) {
        const double u = qk[i];
        const double w = qk1[i];
        qk[i] = c * u - s * w;
        qk1[i] = s * u + c * w;
      }
    }
  }
  const std::uint64_t rot = hi - lo;
  flops::count({.adds = 10 * rot + 3 + 2 * rows * rot,
                .muls = 18 * rot + 5 + 4 * rows * rot,
                .divs = 2 * rot + 1,
                .sqrts = rot + 1});
}

}  // namespace

void sort_decomposition(SpectralDecomposition& dec) {
  const std::size_t n = dec.eigenvalues.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return dec.eigenvalues[i] < dec.eigenvalues[j];
  });
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = dec.eigenvalues[order[i]];
  dec.eigenvalues = std::move(ev);
  if (dec.has_vectors()) {
    Matrix v(dec.vectors.rows(), n);
    for (std::size_t j = 0; j < n; ++j) {
      auto src = dec.vectors.col(order[j]);
      std::copy(src.begin(), src.end(), v.col(j).begin());
    }
    dec.vectors = std::move(v);
  }
}

void normalize_signs(Matrix& vectors) {
  const double rel = std::sqrt(kEps);
  for (std::size_t j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    double big = 0.0;
    for (double x : col) big = std::max(big, std::abs(x));
    for (double x : col) {
      if (std::abs(x) > rel * big) {
        if (x < 0.0)
          for (double& y : col) y = -y;
        break;
      }
    }
  }
}

SpectralDecomposition qr_eigensolve(const SymTridiag& t, bool want_vectors) {
  const std::size_t n = t.size();
  std::vector<double> d = t.diag();
  std::vector<double> e = t.offdiag();
  e.push_back(0.0);

  SpectralDecomposition dec;
  Matrix q;
  if (want_vectors) q = Matrix::identity(n);

  const std::size_t max_sweeps = 30 * n;
  std::size_t sweeps = 0;
  std::size_t hi = n - 1;
  while (hi > 0) {
    for (std::size_t i = 0; i < hi; ++i) {
      const double tol = kEps * (std::abs(d[i]) + std::abs(d[i + 1]));
      if (std::abs(e[i]) <= tol || std::abs(e[i]) < std::numeric_limits<double>::min())
        e[i] = 0.0;
    }
    if (e[hi - 1] == 0.0) {
      --hi;
      continue;
    }
    std::size_t lo = hi - 1;
    while (lo > 0 && e[lo - 1] != 0.0) --lo;
    if (++sweeps > max_sweeps)
      throw ConvergenceError("implicit QR did not converge within " + std::to_string(max_sweeps) +
                             " sweeps");
    qr_sweep(d, e, lo, hi, want_vectors ? &q : nullptr);
  }

  dec.eigenvalues = std::move(d);
  dec.vectors = std::move(q);
  sort_decomposition(dec);
  if (want_vectors) normalize_signs(dec.vectors);
  return dec;
}

SpectralDecomposition dense_eigensolve(const DenseSym& a) {
  auto [t, q] = householder_tridiagonalize(a);
  SpectralDecomposition dec = qr_eigensolve(t, true);
  dec.vectors = q * dec.vectors;
  normalize_signs(dec.vectors);
  return dec;
}

}  // namespace rtdc
