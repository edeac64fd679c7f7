#include "rtdc/rank_one.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bracketed_root.hpp"
#include "dc_common.hpp"
#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"

namespace rtdc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double y : x) s += y * y;
  flops::count({.adds = x.size(), .muls = x.size(), .sqrts = 1});
  return std::sqrt(s);
}

// f(tau) = 1 + beta·Σ w_i / ((d_i - d_k) - tau), w = v², its derivative and
// a bound on the rounding error in f.
struct RankOneSecular {
  const std::vector<double>& d;
  std::vector<double> w;
  double beta;

  detail::SecularPoint eval(std::size_t k, double tau) const {
    const double dk = d[k];
    double psi = 0.0;
    double dpsi = 0.0;
    double apsi = 0.0;
    double wk = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] == dk) wk += w[i];
      const double t = 1.0 / ((d[i] - dk) - tau);
      const double wt = w[i] * t;
      psi += wt;
      apsi += std::abs(wt);
      dpsi += wt * t;
    }
    const std::uint64_t n = d.size();
    flops::count({.adds = 5 * n + 2, .muls = 2 * n + 4, .divs = n});
    const double mag = 1.0 + std::abs(beta) * apsi;
    return {.f = 1.0 + beta * psi,
            .fp = beta * dpsi,
            .bound = 4.0 * kEps * mag,
            .pole1 = -beta * wk};
  }
};

}  // namespace

Matrix RankOneProblem::dense() const {
  const std::size_t n = size();
  Matrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) a(i, j) = a(j, i) = beta * (v[i] * v[j]);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += d[i];
  return a;
}

double rank_one_tolerance(const RankOneProblem& p) {
  double dmax = 0.0;
  for (double x : p.d) dmax = std::max(dmax, std::abs(x));
  const double vn = norm2(p.v);
  return std::max(8.0 * kEps * std::max(dmax, std::abs(p.beta) * vn * vn),
                  std::numeric_limits<double>::min());
}

RankOneDeflation cdc_deflate(const RankOneProblem& p, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("cdc_deflate: tolerance must be positive");
  if (p.v.size() != p.d.size()) throw ArgumentError("cdc_deflate: length mismatch");
  const std::size_t n = p.size();

  RankOneDeflation out;
  out.perm.resize(n);
  std::iota(out.perm.begin(), out.perm.end(), 0);
  std::stable_sort(out.perm.begin(), out.perm.end(),
                   [&](std::size_t a, std::size_t b) { return p.d[a] < p.d[b]; });
  out.basis = OrthoTransform(out.perm);

  std::vector<double> d(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = p.d[out.perm[i]];
    v[i] = p.v[out.perm[i]];
  }
  const double vnorm = norm2(v);
  const double scale = std::abs(p.beta) * vnorm;

  std::vector<double> resolved_value(n, 0.0);
  std::vector<bool> alive(n, true);
  std::vector<std::size_t> resolved_order;
  for (std::size_t i = 0; i < n; ++i) {
    if (scale * std::abs(v[i]) <= tol) {
      alive[i] = false;
      resolved_value[i] = d[i];
      resolved_order.push_back(i);
    }
  }
  flops::count({.muls = n});

  // Survivors in ascending d; nearly equal neighbours are merged by a
  // rotation that moves all of the v weight onto the later one. Rotations
  // can reorder survivors slightly, so repeat until a pass changes nothing.
  std::vector<std::size_t> order;
  for (bool changed = true; changed;) {
    changed = false;
    order.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i]) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    std::size_t prev = kNone;
    for (std::size_t i : order) {
      if (prev == kNone) {
        prev = i;
        continue;
      }
      const double r = std::hypot(v[prev], v[i]);
      const double c = v[i] / r;
      const double s = v[prev] / r;
      flops::count({.adds = 1, .muls = 4, .divs = 2, .sqrts = 1});
      if (std::abs((d[i] - d[prev]) * c * s) <= tol) {
        const OrthoTransform::Givens g{prev, i, c, s};
        out.givens.push_back(g);
        out.basis.push(g);
        resolved_value[prev] = c * c * d[prev] + s * s * d[i];
        const double merged = s * s * d[prev] + c * c * d[i];
        d[i] = merged;
        v[i] = r;
        v[prev] = 0.0;
        alive[prev] = false;
        resolved_order.push_back(prev);
        flops::count({.adds = 2, .muls = 6});
        changed = true;
      }
      prev = i;
    }
    for (std::size_t a = 1; a < order.size() && !changed; ++a)
      if (alive[order[a]] && alive[order[a - 1]] && !(d[order[a - 1]] < d[order[a]]))
        changed = true;
  }

  order.clear();
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  out.keep = order;
  out.reduced.beta = p.beta;
  for (std::size_t i : order) {
    out.reduced.d.push_back(d[i]);
    out.reduced.v.push_back(v[i]);
  }
  std::sort(resolved_order.begin(), resolved_order.end());
  flops::PhaseScope phase(Phase::vectors, true);
  for (std::size_t i : resolved_order)
    out.resolved.push_back({resolved_value[i], out.basis.column(i)});
  return out;
}

RankOneRoots rank_one_roots(const RankOneProblem& p) {
  const std::size_t n = p.size();
  RankOneRoots out;
  if (n == 0) return out;
  if (p.beta == 0.0) throw ArgumentError("rank_one_roots: beta must be nonzero");

  RankOneSecular sec{p.d, std::vector<double>(n), p.beta};
  double vv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sec.w[i] = p.v[i] * p.v[i];
    vv += sec.w[i];
  }
  flops::count({.adds = n, .muls = n});
  const double reach = p.beta * vv;
  const int sign_lo = p.beta > 0.0 ? -1 : 1;

  out.lambda.resize(n);
  out.origin.resize(n);
  out.tau.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t left = kNone;
    std::size_t right = kNone;
    if (p.beta > 0.0) {
      left = j;
      if (j + 1 < n) right = j + 1;
    } else {
      right = j;
      if (j > 0) left = j - 1;
    }

    std::size_t origin = 0;
    double lo = 0.0, hi = 0.0, x0 = 0.0;
    detail::SecularPoint p0;
    if (left != kNone && right != kNone) {
      const double gap = p.d[right] - p.d[left];
      const double half = 0.5 * gap;
      p0 = sec.eval(left, half);
      if (p0.f != 0.0 && detail::sign_of(p0.f) == sign_lo) {
        origin = right;
        lo = -(gap - half);
        hi = 0.0;
        x0 = lo;
      } else {
        origin = left;
        lo = 0.0;
        hi = half;
        x0 = half;
      }
    } else if (left != kNone) {
      origin = left;
      lo = 0.0;
      hi = reach;
      x0 = hi;
      p0 = sec.eval(origin, x0);
    } else {
      origin = right;
      lo = reach;
      hi = 0.0;
      x0 = lo;
      p0 = sec.eval(origin, x0);
    }
    auto eval = [&](double tau) { return sec.eval(origin, tau); };
    const auto root = detail::solve_bracketed(eval, lo, hi, sign_lo, x0, p0);
    out.origin[j] = origin;
    out.tau[j] = root.tau;
    out.lambda[j] = p.d[origin] + root.tau;
  }
  flops::count({.adds = n});
  return out;
}

std::vector<double> cdc_secular_roots(const RankOneProblem& p) { return rank_one_roots(p).lambda; }

Matrix cdc_stable_vectors(const RankOneProblem& p, const RankOneRoots& roots) {
  const std::size_t n = p.size();
  if (roots.size() != n) throw ArgumentError("cdc_stable_vectors: need one root per entry");
  Matrix x(n, n);
  if (n == 0) return x;

  // |v̂_i|² = ((λ_i - d_i)/β) · Π_{j≠i} (λ_j - d_i)/(d_j - d_i); every factor
  // is positive exactly when the roots interlace d.
  std::vector<double> vhat(n);
  for (std::size_t i = 0; i < n; ++i) {
    double prod = roots.gap(p.d, i, i) / p.beta;
    bool ok = prod > 0.0;
    for (std::size_t j = 0; j < n && ok; ++j) {
      if (j == i) continue;
      const double factor = roots.gap(p.d, i, j) / (p.d[j] - p.d[i]);
      ok = factor > 0.0;
      prod *= factor;
    }
    if (!ok || !std::isfinite(prod))
      throw InternalConsistencyError("secular roots do not interlace the poles at index " +
                                     std::to_string(i));
    vhat[i] = std::copysign(std::sqrt(prod), p.v[i]);
  }
  const std::uint64_t nn = static_cast<std::uint64_t>(n) * n;
  flops::count({.adds = 3 * nn, .muls = nn, .divs = nn, .sqrts = n});

  for (std::size_t j = 0; j < n; ++j) {
    auto col = x.col(j);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = -vhat[i] / roots.gap(p.d, i, j);
      s += col[i] * col[i];
    }
    const double inv = 1.0 / std::sqrt(s);
    for (double& y : col) y *= inv;
  }
  flops::count({.adds = 3 * nn, .muls = 2 * nn, .divs = nn + n, .sqrts = n});
  return x;
}

Matrix cdc_stable_vectors(const RankOneProblem& p, const std::vector<double>& roots) {
  RankOneRoots r;
  r.lambda = roots;
  for (double lam : roots) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (std::abs(lam - p.d[i]) < std::abs(lam - p.d[best])) best = i;
    r.origin.push_back(best);
    r.tau.push_back(p.size() ? lam - p.d[best] : 0.0);
  }
  return cdc_stable_vectors(p, r);
}

SpectralDecomposition rank_one_eigensystem(const RankOneProblem& p) {
  const std::size_t n = p.size();
  if (n == 0) return {};
  RankOneDeflation defl;
  {
    flops::PhaseScope phase(Phase::deflate);
    defl = cdc_deflate(p, rank_one_tolerance(p));
  }
  RankOneRoots roots;
  {
    flops::PhaseScope phase(Phase::secular);
    roots = rank_one_roots(defl.reduced);
  }
  flops::PhaseScope phase(Phase::vectors);
  const std::size_t r = defl.reduced.size();
  std::vector<double> values;
  values.reserve(n);
  Matrix x(n, n);
  std::size_t col = 0;
  for (const auto& rp : defl.resolved) {
    values.push_back(rp.eigenvalue);
    std::copy(rp.vector.begin(), rp.vector.end(), x.col(col++).begin());
  }
  if (r > 0) {
    const Matrix y = cdc_stable_vectors(defl.reduced, roots);
    Matrix w(n, r);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < r; ++k) w(defl.keep[k], j) = y(k, j);
    const Matrix mapped = defl.basis.apply(w);
    for (std::size_t j = 0; j < r; ++j) {
      values.push_back(roots.lambda[j]);
      std::copy(mapped.col(j).begin(), mapped.col(j).end(), x.col(col++).begin());
    }
  }
  return detail::assemble_sorted(std::move(values), std::move(x));
}

SpectralDecomposition cdc_solve(const SymTridiag& t, std::size_t base_cutoff, unsigned threads) {
  if (base_cutoff < 1) throw ArgumentError("cdc_solve: base_cutoff must be at least 1");
  const std::size_t n = t.size();
  if (n <= base_cutoff) return qr_eigensolve(t, true);

  const auto zeros = detail::zero_offdiag_positions(t);
  if (!zeros.empty()) {
    flops::PhaseScope phase(Phase::subproblems, true);
    return detail::solve_decoupled(
        t, zeros, [&](const SymTridiag& b) { return cdc_solve(b, base_cutoff, threads); });
  }

  const TwoWaySplit split = split_two(t, (n + 1) / 2);
  SpectralDecomposition a, b;
  {
    flops::PhaseScope phase(Phase::subproblems, true);
    const unsigned ct = detail::child_threads(threads, 2);
    detail::run_children(
        threads, [&] { a = cdc_solve(split.t1, base_cutoff, ct); },
        [&] { b = cdc_solve(split.t2, base_cutoff, ct); });
  }

  RankOneProblem p;
  p.beta = split.beta;
  p.d = a.eigenvalues;
  p.d.insert(p.d.end(), b.eigenvalues.begin(), b.eigenvalues.end());
  const std::size_t k = a.size();
  for (std::size_t j = 0; j < k; ++j) p.v.push_back(a.vectors(k - 1, j));
  for (std::size_t j = 0; j < b.size(); ++j) p.v.push_back(b.vectors(0, j));

  SpectralDecomposition merged = rank_one_eigensystem(p);
  flops::PhaseScope phase(Phase::vectors);
  const Matrix* blocks[] = {&a.vectors, &b.vectors};
  merged.vectors = detail::block_diag_times(blocks, merged.vectors);
  normalize_signs(merged.vectors);
  return merged;
}

}  // namespace rtdc
