#include <algorithm>
#include <cmath>
#include <limits>

#include "dc_common.hpp"
#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"
#include "rtdc/rank_one.hpp"
#include "rtdc/rank_two.hpp"

namespace rtdc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void normalize(std::span<double> x) {
  double s = 0.0;
  for (double y : x) s += y * y;
  if (s == 0.0) return;
  const double inv = 1.0 / std::sqrt(s);
  for (double& y : x) y *= inv;
  flops::count({.adds = x.size(), .muls = 2 * x.size(), .divs = 1, .sqrts = 1});
}

// True when no pole of the problem lies between roots j and j+1.
bool same_interval(const RankTwoProblem& p, const RankTwoRoots& r, std::size_t j) {
  const std::size_t oa = r.origin[j], ob = r.origin[j + 1];
  if (oa == ob) return (r.tau[j] > 0.0) == (r.tau[j + 1] > 0.0) && r.tau[j] != 0.0;
  return p.d[oa] < p.d[ob] && r.tau[j] > 0.0 && r.tau[j + 1] < 0.0;
}

// Roots j and j+1 agree to a few ulps within one interval.
bool double_root(const RankTwoProblem& p, const RankTwoRoots& r, std::size_t j) {
  const double a = r.lambda[j], b = r.lambda[j + 1];
  return std::abs(b - a) <= 4.0 * kEps * (1.0 + std::abs(a)) && same_interval(p, r, j);
}

}  // namespace

RankTwoProblem form_rank_two(const ThreeWaySplit& split, const SpectralDecomposition& dec1,
                             const SpectralDecomposition& dec2,
                             const SpectralDecomposition& dec3) {
  const SpectralDecomposition* decs[] = {&dec1, &dec2, &dec3};
  const std::size_t sizes[] = {split.t1.size(), split.t2.size(), split.t3.size()};
  for (int b = 0; b < 3; ++b) {
    const auto& dec = *decs[b];
    if (dec.size() != sizes[b] || dec.vectors.rows() != sizes[b] ||
        dec.vectors.cols() != sizes[b])
      throw ArgumentError("form_rank_two: decomposition " + std::to_string(b + 1) +
                          " does not match its block");
  }
  const std::size_t k1 = sizes[0], k2 = sizes[1], k3 = sizes[2];
  RankTwoProblem p;
  p.beta1 = split.beta1;
  p.beta2 = split.beta2;
  p.d.reserve(k1 + k2 + k3);
  for (const auto* dec : decs) p.d.insert(p.d.end(), dec->eigenvalues.begin(), dec->eigenvalues.end());
  p.v1.assign(k1 + k2 + k3, 0.0);
  p.v2.assign(k1 + k2 + k3, 0.0);
  for (std::size_t j = 0; j < k1; ++j) p.v1[j] = dec1.vectors(k1 - 1, j);
  for (std::size_t j = 0; j < k2; ++j) {
    p.v1[k1 + j] = dec2.vectors(0, j);
    p.v2[k1 + j] = dec2.vectors(k2 - 1, j);
  }
  for (std::size_t j = 0; j < k3; ++j) p.v2[k1 + k2 + j] = dec3.vectors(0, j);
  return p;
}

Matrix block_q(const SpectralDecomposition& dec1, const SpectralDecomposition& dec2,
               const SpectralDecomposition& dec3) {
  const std::size_t n = dec1.size() + dec2.size() + dec3.size();
  Matrix q(n, n);
  std::size_t off = 0;
  for (const auto* dec : {&dec1, &dec2, &dec3}) {
    for (std::size_t j = 0; j < dec->size(); ++j)
      for (std::size_t i = 0; i < dec->size(); ++i) q(off + i, off + j) = dec->vectors(i, j);
    off += dec->size();
  }
  return q;
}

Matrix rank_two_vectors(const RankTwoProblem& p, const RankTwoRoots& roots) {
  const std::size_t n = p.size();
  if (roots.size() != n) throw ArgumentError("rank_two_vectors: need one root per entry");

  // First pass: the 2x2 system at every root, and whether it is numerically
  // zero (both rows at rounding level), which marks a double root.
  struct System {
    double r11, r12, r21, r22;
    bool vanishes;
  };
  std::vector<System> sys(n);
  for (std::size_t j = 0; j < n; ++j) {
    double c1 = 0, c2 = 0, c3 = 0, mag = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const double g = roots.gap(p.d, q, j);
      const double a1 = p.v1[q] / g, a2 = p.v2[q] / g;
      c1 += p.v1[q] * a1;
      c2 += p.v2[q] * a2;
      c3 += p.v1[q] * a2;
      mag += std::abs(p.v1[q] * a1) + std::abs(p.v2[q] * a2);
    }
    flops::count({.adds = 7 * n, .muls = 5 * n, .divs = 2 * n});
    System& s = sys[j];
    s.r11 = p.beta1 * c1 - 1.0;
    s.r12 = p.beta1 * c3;
    s.r21 = p.beta2 * c3;
    s.r22 = p.beta2 * c2 - 1.0;
    const double scale = 1.0 + (std::abs(p.beta1) + std::abs(p.beta2)) * mag;
    s.vanishes = std::max(std::hypot(s.r11, s.r12), std::hypot(s.r21, s.r22)) <=
                 8.0 * static_cast<double>(n) * kEps * scale;
    flops::count({.adds = 6, .muls = 8, .sqrts = 2});
  }
  auto paired = [&](std::size_t j) {  // roots j and j + 1 form a double root
    if (double_root(p, roots, j)) return true;
    if (!(sys[j].vanishes || sys[j + 1].vanishes)) return false;
    const double a = roots.lambda[j], b = roots.lambda[j + 1];
    return std::abs(b - a) <= std::sqrt(kEps) * (1.0 + std::abs(a)) && same_interval(p, roots, j);
  };

  Matrix x(n, n);
  std::vector<double> u1(n), u2(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t q = 0; q < n; ++q) {
      const double g = roots.gap(p.d, q, j);
      u1[q] = p.v1[q] / g;
      u2[q] = p.v2[q] / g;
    }
    flops::count({.divs = 2 * n});
    const bool paired_prev = j > 0 && paired(j - 1);
    const bool paired_next = j + 1 < n && paired(j);
    auto col = x.col(j);
    if (paired_prev || paired_next) {
      // Numerically double root: the eigenspace is span{u1, u2}.
      std::copy(u1.begin(), u1.end(), col.begin());
      normalize(col);
      if (paired_prev) {
        double proj = 0.0;
        for (std::size_t q = 0; q < n; ++q) proj += col[q] * u2[q];
        for (std::size_t q = 0; q < n; ++q) col[q] = u2[q] - proj * col[q];
        flops::count({.adds = 2 * n, .muls = 2 * n});
        normalize(col);
      }
      continue;
    }
    const System& s = sys[j];
    if (s.vanishes)
      throw DegenerateSystemError("rank_two_vectors: 2x2 system vanishes at simple root " +
                                  std::to_string(roots.lambda[j]));
    double a, b;
    if (std::hypot(s.r11, s.r12) >= std::hypot(s.r21, s.r22)) {
      a = s.r12;
      b = -s.r11;
    } else {
      a = s.r22;
      b = -s.r21;
    }
    for (std::size_t q = 0; q < n; ++q) col[q] = a * u1[q] + b * u2[q];
    flops::count({.adds = n, .muls = 2 * n});
    normalize(col);
  }
  return x;
}

Matrix rank_two_vectors(const RankTwoProblem& p, const std::vector<double>& roots) {
  RankTwoRoots r;
  r.lambda = roots;
  for (double lam : roots) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (std::abs(lam - p.d[i]) < std::abs(lam - p.d[best])) best = i;
    r.origin.push_back(best);
    r.tau.push_back(p.size() ? lam - p.d[best] : 0.0);
  }
  return rank_two_vectors(p, r);
}

SpectralDecomposition rank_two_vectors_stable(const RankTwoProblem& p, std::size_t k12) {
  const std::size_t n = p.size();
  if (k12 > n) throw ArgumentError("rank_two_vectors_stable: k12 exceeds the order");
  for (std::size_t i = k12; i < n; ++i)
    if (p.v1[i] != 0.0)
      throw ArgumentError("rank_two_vectors_stable: v1 must vanish beyond the first two blocks");

  // Step 1: B1 = diag(d[0:k12]) + beta1·v1·v1ᵀ.
  RankOneProblem first;
  first.beta = p.beta1;
  first.d.assign(p.d.begin(), p.d.begin() + k12);
  first.v.assign(p.v1.begin(), p.v1.begin() + k12);
  const SpectralDecomposition e1 = rank_one_eigensystem(first);

  // Step 2: diag(Λ1, d[k12:]) + beta2·z·zᵀ with z = diag(Q1, I)ᵀ·v2.
  RankOneProblem second;
  second.beta = p.beta2;
  second.d = e1.eigenvalues;
  second.d.insert(second.d.end(), p.d.begin() + k12, p.d.end());
  second.v.assign(n, 0.0);
  for (std::size_t j = 0; j < k12; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < k12; ++i) s += e1.vectors(i, j) * p.v2[i];
    second.v[j] = s;
  }
  for (std::size_t i = k12; i < n; ++i) second.v[i] = p.v2[i];
  flops::count({.adds = k12 * k12, .muls = k12 * k12});
  SpectralDecomposition e2 = rank_one_eigensystem(second);

  Matrix id = Matrix::identity(n - k12);
  const Matrix* blocks[] = {&e1.vectors, &id};
  e2.vectors = detail::block_diag_times(blocks, e2.vectors);
  return e2;
}

SpectralDecomposition rank_two_eigensystem(const RankTwoProblem& p, bool stable_vectors,
                                           std::size_t k12) {
  const std::size_t n = p.size();
  if (n == 0) return {};
  RankTwoDeflation defl;
  {
    flops::PhaseScope phase(Phase::deflate);
    defl = deflate_rank_two(p);
  }
  RankTwoRoots roots;
  {
    flops::PhaseScope phase(Phase::secular);
    const IntervalClassification cls = classify_intervals(defl.reduced);
    roots = rank_two_roots(defl.reduced, cls);
  }

  flops::PhaseScope phase(Phase::vectors, true);
  std::vector<double> values;
  values.reserve(n);
  for (const auto& rp : defl.resolved) values.push_back(rp.eigenvalue);
  values.insert(values.end(), roots.lambda.begin(), roots.lambda.end());

  if (stable_vectors) {
    SpectralDecomposition m2 = rank_two_vectors_stable(p, k12);
    std::stable_sort(values.begin(), values.end());
    m2.eigenvalues = std::move(values);
    return m2;
  }

  Matrix x(n, n);
  std::size_t col = 0;
  for (const auto& rp : defl.resolved)
    std::copy(rp.vector.begin(), rp.vector.end(), x.col(col++).begin());
  const std::size_t r = defl.reduced.size();
  if (r > 0) {
    const Matrix y = rank_two_vectors(defl.reduced, roots);
    Matrix w(n, r);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < r; ++k) w(defl.keep[k], j) = y(k, j);
    const Matrix mapped = defl.basis.apply(w);
    for (std::size_t j = 0; j < r; ++j)
      std::copy(mapped.col(j).begin(), mapped.col(j).end(), x.col(col++).begin());
  }
  return detail::assemble_sorted(std::move(values), std::move(x));
}

SpectralDecomposition rtdc_solve(const SymTridiag& t, const RtdcOptions& options) {
  if (options.base_cutoff < 1) throw ArgumentError("rtdc_solve: base_cutoff must be at least 1");
  const std::size_t n = t.size();
  if (n <= options.base_cutoff) return qr_eigensolve(t, true);

  const auto zeros = detail::zero_offdiag_positions(t);
  if (!zeros.empty()) {
    flops::PhaseScope phase(Phase::subproblems, true);
    return detail::solve_decoupled(t, zeros,
                                   [&](const SymTridiag& b) { return rtdc_solve(b, options); });
  }
  if (n < 3) return cdc_solve(t, options.base_cutoff, options.threads);

  const auto [k1, k2] = default_three_way_cut(n);
  const ThreeWaySplit split = split_three(t, k1, k2);
  SpectralDecomposition a, b, c;
  {
    flops::PhaseScope phase(Phase::subproblems, true);
    RtdcOptions child = options;
    child.threads = detail::child_threads(options.threads, 3);
    detail::run_children(
        options.threads, [&] { a = rtdc_solve(split.t1, child); },
        [&] { b = rtdc_solve(split.t2, child); }, [&] { c = rtdc_solve(split.t3, child); });
  }

  const RankTwoProblem p = form_rank_two(split, a, b, c);
  SpectralDecomposition merged = rank_two_eigensystem(p, options.stable_vectors, k1 + k2);
  flops::PhaseScope phase(Phase::vectors);
  const Matrix* blocks[] = {&a.vectors, &b.vectors, &c.vectors};
  merged.vectors = detail::block_diag_times(blocks, merged.vectors);
  normalize_signs(merged.vectors);
  return merged;
}

SpectralDecomposition rtdc_solve(const SymTridiag& t, std::size_t base_cutoff, bool stable) {
  return rtdc_solve(t, RtdcOptions{.base_cutoff = base_cutoff, .stable_vectors = stable});
}

}  // namespace rtdc
