#pragma once

// Safeguarded root finder for secular functions written in shifted
// coordinates tau = lambda - d_origin. A sign-change bracket is kept at all
// times; model steps are taken only when they land strictly inside it.

#include <cmath>
#include <cstddef>
#include <limits>

namespace rtdc::detail {

/// f and f' at some tau, with the split f = pole2/tau² + pole1/tau + rest
/// where rest is smooth near tau = 0.
struct SecularPoint {
  double f = 0.0;
  double fp = 0.0;
  /// Rounding-error bound on f; |f| at or below it counts as a root.
  double bound = 0.0;
  double pole1 = 0.0;
  double pole2 = 0.0;
};

struct BracketedRoot {
  double tau = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t evaluations = 0;
};

inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

namespace root_model {

// Root of a·t² + b·t + c in (lo, hi) closest to x, or NaN.
inline double quadratic_in(double a, double b, double c, double lo, double hi, double x) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double r1 = nan, r2 = nan;
  if (a == 0.0) {
    if (b != 0.0) r1 = -c / b;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return nan;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q != 0.0) {
      r1 = q / a;
      r2 = c / q;
    } else {
      r1 = 0.0;
    }
  }
  auto ok = [&](double r) { return std::isfinite(r) && r > lo && r < hi; };
  if (ok(r1) && ok(r2)) return std::abs(r1 - x) <= std::abs(r2 - x) ? r1 : r2;
  if (ok(r1)) return r1;
  if (ok(r2)) return r2;
  return nan;
}

// Keeps the pole terms exact and replaces the smooth rest by its tangent
// line at x, then solves the resulting polynomial equation.
inline double pole_step(const SecularPoint& p, double x, double lo, double hi) {
  if (x == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double ix = 1.0 / x;
  const double rest = p.f - p.pole2 * ix * ix - p.pole1 * ix;
  const double slope = p.fp + 2.0 * p.pole2 * ix * ix * ix + p.pole1 * ix * ix;
  const double e = rest - slope * x;  // rest(t) ≈ e + slope·t
  if (p.pole2 == 0.0) return quadratic_in(slope, e, p.pole1, lo, hi, x);
  // pole2 + pole1·t + e·t² + slope·t³ = 0: Newton from the quadratic guess.
  double t = quadratic_in(e + slope * x, p.pole1, p.pole2, lo, hi, x);
  if (!std::isfinite(t)) return t;
  for (int k = 0; k < 3; ++k) {
    const double g = p.pole2 + t * (p.pole1 + t * (e + t * slope));
    const double gp = p.pole1 + t * (2.0 * e + 3.0 * t * slope);
    if (gp == 0.0) break;
    t -= g / gp;
  }
  return t;
}

}  // namespace root_model

/// Finds a root of eval(tau) in [lo, hi].
///   sign_lo  sign of f just above lo (f has the opposite sign near hi)
///   x0, p0   starting point inside [lo, hi] and its evaluation
/// Stops when |f| is within its error bound, when the bracket width is at
/// most 2·eps·(|lo| + |hi|), or when the bracket can no longer be split.
/// The pole model and Newton take turns whenever one of them fails to cut
/// |f| by a factor of four; two steps in a row that fail to halve |f| are
/// followed by a bisection, geometric when the bracket spans decades.
template <class Eval>
BracketedRoot solve_bracketed(Eval&& eval, double lo, double hi, int sign_lo, double x0,
                              SecularPoint p0, std::size_t max_iter = 200) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  BracketedRoot out;
  double x = x0;
  SecularPoint p = p0;
  double best_x = x;
  double best_f = std::abs(p.f);
  double prev_abs = std::numeric_limits<double>::infinity();
  int slow = 0;
  bool use_pole = true;

  for (std::size_t it = 0; it < max_iter; ++it) {
    if (std::abs(p.f) <= p.bound) {
      best_x = x;
      break;
    }
    if (std::abs(p.f) < best_f) {
      best_f = std::abs(p.f);
      best_x = x;
    }
    if (sign_of(p.f) == sign_lo)
      lo = x;
    else
      hi = x;
    if (hi - lo <= 2.0 * eps * (std::abs(lo) + std::abs(hi))) break;

    slow = std::abs(p.f) > 0.5 * prev_abs ? slow + 1 : 0;
    if (std::abs(p.f) > 0.25 * prev_abs) use_pole = !use_pole;
    prev_abs = std::abs(p.f);

    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    // Roots may sit many decades closer to the pole than the far end of the
    // bracket; split such brackets in the logarithm.
    if (lo > 0.0 && hi > 8.0 * lo) mid = std::sqrt(lo) * std::sqrt(hi);
    if (hi < 0.0 && lo < 8.0 * hi) mid = -std::sqrt(-lo) * std::sqrt(-hi);

    auto inside = [&](double c) { return std::isfinite(c) && c > lo && c < hi; };
    double cand = std::numeric_limits<double>::quiet_NaN();
    if (slow >= 2) {
      slow = 0;  // one bisection, then the models get another chance
    } else {
      if (use_pole) cand = root_model::pole_step(p, x, lo, hi);
      if (!inside(cand) && p.fp != 0.0) cand = x - p.f / p.fp;
      if (!inside(cand) && !use_pole) cand = root_model::pole_step(p, x, lo, hi);
    }
    if (inside(cand)) {
      // A step that is already below the resolution target is pushed a
      // little further so the next evaluation closes the bracket.
      const double nudge = eps * (std::abs(x) + std::abs(cand));
      if (std::abs(cand - x) < nudge) {
        cand += std::copysign(nudge, cand - x);
        if (!inside(cand)) cand = mid;
      }
    } else {
      cand = mid;
    }
    x = cand;
    p = eval(x);
    ++out.evaluations;
  }
  if (std::abs(p.f) <= p.bound) best_x = x;
  out.tau = best_x;
  out.lo = lo;
  out.hi = hi;
  return out;
}

}  // namespace rtdc::detail
