#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bracketed_root.hpp"
#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"
#include "rtdc/rank_two.hpp"

namespace rtdc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Terms {
  double f = 0.0;
  double fp = 0.0;
  double fpp = 0.0;
  double mag = 0.0;
  // Coefficients of 1/tau² and 1/tau contributed by the origin group.
  double pole2 = 0.0;
  double pole1 = 0.0;
  // Full sums c1, c2, c3 and their derivatives (order >= 1 only).
  double cc1 = 0.0, cc2 = 0.0, cc3 = 0.0;
  double cc1p = 0.0, cc2p = 0.0, cc3p = 0.0;
  // Sums of |terms| of c1, c2, c3 (order >= 1 only).
  double ac1 = 0.0, ac2 = 0.0, ac3 = 0.0;
};

// Evaluates f at lambda = d[k] + tau. The entries equal to d[k] (the origin
// group) are handled in closed form: with x = 1/tau,
//   c1·c2 - c3² = det·x² + K·x + P,
// where det is the squared 2x2-minor sum of the group (exactly zero for a
// single entry), so nothing large cancels near the pole.
class Secular2 {
 public:
  explicit Secular2(const RankTwoProblem& p) : p_(p) {
    const std::size_t n = p.size();
    w1_.resize(n);
    w2_.resize(n);
    w3_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      w1_[i] = p.v1[i] * p.v1[i];
      w2_[i] = p.v2[i] * p.v2[i];
      w3_[i] = p.v1[i] * p.v2[i];
    }
    flops::count({.muls = 3 * n});
  }

  const RankTwoProblem& problem() const { return p_; }

  // order 0: f; 1: adds f'; 2: adds f'' and the magnitude bound.
  Terms eval(std::size_t k, double tau, int order) const {
    const auto& d = p_.d;
    const double dk = d[k];
    const std::size_t n = d.size();
    double c1 = 0, c2 = 0, c3 = 0, a1 = 0, a2 = 0, a3 = 0;
    double c1p = 0, c2p = 0, c3p = 0, c1pp = 0, c2pp = 0, c3pp = 0;
    double s1 = 0, s2 = 0, s3 = 0;
    std::array<std::size_t, 4> grp{};
    std::size_t gcount = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] == dk) {
        s1 += w1_[i];
        s2 += w2_[i];
        s3 += w3_[i];
        if (gcount < grp.size()) grp[gcount] = i;
        ++gcount;
        continue;
      }
      const double t = 1.0 / (tau - (d[i] - dk));
      c1 += w1_[i] * t;
      c2 += w2_[i] * t;
      c3 += w3_[i] * t;
      if (order >= 1) {
        const double at = std::abs(t);
        a1 += w1_[i] * at;
        a2 += w2_[i] * at;
        a3 += std::abs(w3_[i]) * at;
      }
      if (order >= 1) {
        const double t2 = t * t;
        c1p -= w1_[i] * t2;
        c2p -= w2_[i] * t2;
        c3p -= w3_[i] * t2;
        if (order >= 2) {
          const double t3 = t2 * t;
          c1pp += 2.0 * w1_[i] * t3;
          c2pp += 2.0 * w2_[i] * t3;
          c3pp += 2.0 * w3_[i] * t3;
        }
      }
    }
    double det = 0.0;
    if (gcount == 2) {
      const double m = p_.v1[grp[0]] * p_.v2[grp[1]] - p_.v1[grp[1]] * p_.v2[grp[0]];
      det = m * m;
    } else if (gcount > 2) {
      det = std::max(0.0, s1 * s2 - s3 * s3);
    }

    const double b1 = p_.beta1, b2 = p_.beta2, b12 = b1 * b2;
    const double x = 1.0 / tau;
    const double K = s1 * c2 + s2 * c1 - 2.0 * s3 * c3;
    const double P = c1 * c2 - c3 * c3;
    Terms out;
    out.f = b12 * (det * x * x + K * x + P) - b1 * (s1 * x + c1) - b2 * (s2 * x + c2) + 1.0;
    out.pole2 = b12 * det;
    out.pole1 = b12 * K - b1 * s1 - b2 * s2;
    // Per-entry work: 5 adds and 3 muls for f; the derivative and the
    // magnitude sums add 6 and 7; the second derivative 3 and 7 more.
    const std::uint64_t adds = order >= 2 ? 14 : (order >= 1 ? 11 : 5);
    const std::uint64_t muls = order >= 2 ? 17 : (order >= 1 ? 10 : 3);
    if (order >= 1) {
      const double x2 = x * x, x3 = x2 * x;
      out.cc1 = c1 + s1 * x;
      out.cc2 = c2 + s2 * x;
      out.cc3 = c3 + s3 * x;
      out.cc1p = c1p - s1 * x2;
      out.cc2p = c2p - s2 * x2;
      out.cc3p = c3p - s3 * x2;
      out.ac1 = a1 + s1 * std::abs(x);
      out.ac2 = a2 + s2 * std::abs(x);
      out.ac3 = a3 + std::abs(s3 * x);
      const double Kp = s1 * c2p + s2 * c1p - 2.0 * s3 * c3p;
      const double Pp = c1p * c2 + c1 * c2p - 2.0 * c3 * c3p;
      out.fp = b12 * (-2.0 * det * x3 - x2 * K + x * Kp + Pp) - b1 * (-s1 * x2 + c1p) -
               b2 * (-s2 * x2 + c2p);
      if (order >= 2) {
        const double x4 = x2 * x2;
        const double Kpp = s1 * c2pp + s2 * c1pp - 2.0 * s3 * c3pp;
        const double Ppp =
            c1pp * c2 + 2.0 * c1p * c2p + c1 * c2pp - 2.0 * c3p * c3p - 2.0 * c3 * c3pp;
        out.fpp = b12 * (6.0 * det * x4 + 2.0 * x3 * K - 2.0 * x2 * Kp + x * Kpp + Ppp) -
                  b1 * (2.0 * s1 * x3 + c1pp) - b2 * (2.0 * s2 * x3 + c2pp);
      }
      {
        const double ax = std::abs(x);
        out.mag = std::abs(b12) * (det * x * x +
                                   ax * (s1 * a2 + s2 * a1 + 2.0 * std::abs(s3) * a3) +
                                   a1 * a2 + a3 * a3) +
                  std::abs(b1) * (s1 * ax + a1) + std::abs(b2) * (s2 * ax + a2) + 1.0;
      }
    }
    const std::uint64_t nn = n;
    flops::count({.adds = adds * nn + 40, .muls = muls * nn + 60, .divs = nn + 1});
    return out;
  }

 private:
  const RankTwoProblem& p_;
  std::vector<double> w1_, w2_, w3_;
};

// |f| below this multiple of eps·(sum of |terms|) is rounding noise.
constexpr double kBoundFactor = 4.0 * std::numeric_limits<double>::epsilon();

detail::SecularPoint to_point(const Terms& t) {
  return {.f = t.f, .fp = t.fp, .bound = kBoundFactor * t.mag, .pole1 = t.pole1, .pole2 = t.pole2};
}

int sgn(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

void require_sorted(const RankTwoProblem& p, const char* who) {
  if (p.v1.size() != p.size() || p.v2.size() != p.size())
    throw ArgumentError(std::string(who) + ": length mismatch");
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p.d[i] < p.d[i - 1]) throw ArgumentError(std::string(who) + ": d must be ascending");
}

// End of an interval: a pole (tau = 0 relative to origin) or a finite point.
struct End {
  bool pole = false;
  std::size_t origin = 0;
  double tau = 0.0;
};

// Re-expresses d[from] + tau relative to d[to].
double rebase(const std::vector<double>& d, std::size_t from, double tau, std::size_t to) {
  return from == to ? tau : (d[from] - d[to]) + tau;
}


// With S(λ) = diag(1/beta1, 1/beta2) - C(λ) we have f = beta1·beta2·det S,
// and both eigenvalues mu1 <= mu2 of S are nondecreasing between poles.
// Near a (nearly) double root f is flat, while each branch still crosses
// zero with a healthy slope, so the two roots of a two-root interval are
// taken as the zeros of mu2 (left) and mu1 (right).
detail::SecularPoint branch_point(const Secular2& sec, std::size_t o, double tau, int k) {
  const RankTwoProblem& p = sec.problem();
  const Terms t = sec.eval(o, tau, 1);
  const double s11 = 1.0 / p.beta1 - t.cc1;
  const double s22 = 1.0 / p.beta2 - t.cc2;
  const double s12 = -t.cc3;
  const double mean = 0.5 * (s11 + s22);
  const double rad = std::hypot(0.5 * (s11 - s22), s12);
  const double det = t.f / (p.beta1 * p.beta2);
  // Entries of S, hence eigenvalues formed from mean and radius, carry an
  // absolute error of order eps times the sum of |terms|. The eigenvalue of
  // smaller magnitude may instead come from det/(larger one), whose pole
  // terms cancel analytically; the estimate with the smaller error wins.
  const double err_s = kBoundFactor * (std::abs(1.0 / p.beta1) + std::abs(1.0 / p.beta2) +
                                       t.ac1 + t.ac2 + 2.0 * t.ac3);
  const double err_det = kBoundFactor * t.mag / std::abs(p.beta1 * p.beta2);
  const bool upper_big = mean >= 0.0;
  const double big = upper_big ? mean + rad : mean - rad;
  double small = upper_big ? mean - rad : mean + rad;
  double err_small = err_s;
  if (big != 0.0) {
    const double via_det = det / big;
    const double err_via = (err_det + std::abs(via_det) * err_s) / std::abs(big);
    if (err_via < err_s) {
      small = via_det;
      err_small = err_via;
    }
  }
  const bool want_big = (k == 2) == upper_big;
  const double mu = want_big ? big : small;
  const double bound = want_big ? err_s : err_small;
  // Eigenvector (u1, u2) of S for mu, then mu' = uᵀ·S'·u / uᵀu.
  double u1 = s12, u2 = mu - s11;
  const double w1 = mu - s22, w2 = s12;
  if (std::hypot(w1, w2) > std::hypot(u1, u2)) {
    u1 = w1;
    u2 = w2;
  }
  const double uu = u1 * u1 + u2 * u2;
  const double dmu =
      uu > 0.0 ? -(u1 * u1 * t.cc1p + 2.0 * u1 * u2 * t.cc3p + u2 * u2 * t.cc2p) / uu
               : -0.5 * (t.cc1p + t.cc2p);
  flops::count({.adds = 20, .muls = 26, .divs = 7, .sqrts = 2});
  return {.f = mu, .fp = dmu, .bound = bound};
}

class Classifier {
 public:
  Classifier(const RankTwoProblem& p, IntervalClassification& cls)
      : p_(p), sec_(p), cls_(cls), m_(cls.values.size()) {
    for (double x : p.d) scale_ = std::max(scale_, std::abs(x));
    if (scale_ == 0.0) scale_ = 1.0;
  }

  End left_end(std::size_t j) const {
    if (j == 0) return {false, cls_.first[0], cls_.lower_bound - cls_.values[0]};
    return {true, cls_.first[j - 1], 0.0};
  }
  End right_end(std::size_t j) const {
    if (j == m_) return {false, cls_.first[m_ - 1], cls_.upper_bound - cls_.values[m_ - 1]};
    return {true, cls_.first[j], 0.0};
  }
  int left_sign(std::size_t j) const { return j == 0 ? 1 : sgn(cls_.gplus[j - 1]); }
  int right_sign(std::size_t j) const { return j == m_ ? 1 : sgn(cls_.gminus[j]); }

  std::size_t multiplicity_at(std::size_t idx) const {
    for (std::size_t j = 0; j < m_; ++j)
      if (cls_.first[j] == idx) return cls_.multiplicity[j];
    return 1;
  }

  Terms eval(const ShiftedPoint& pt, int order) const { return sec_.eval(pt.origin, pt.tau, order); }

  // Point at fraction theta of the interval, expressed relative to the
  // nearer pole end.
  ShiftedPoint at_fraction(const End& a, const End& b, double theta) const {
    const auto& d = p_.d;
    const bool use_left = a.pole && (!b.pole || theta <= 0.5);
    const std::size_t o = use_left ? a.origin : b.origin;
    const double ta = rebase(d, a.origin, a.tau, o);
    const double tb = rebase(d, b.origin, b.tau, o);
    if (theta <= 0.0) return {o, ta};
    if (theta >= 1.0) return {o, tb};
    const double w = tb - ta;
    if (use_left || (!a.pole && !b.pole)) return {o, ta + theta * w};
    return {o, tb - (1.0 - theta) * w};
  }

  struct StationaryResult {
    bool two = false;
    bool tangent = false;
    ShiftedPoint split;
  };

  // Decides whether f, with sign s near both ends, reaches the opposite sign
  // inside (a, b).
  StationaryResult stationary_test(const End& a, const End& b, int s, std::size_t probes) const {
    struct Probe {
      ShiftedPoint pt;
      double sfp;
      double sf;
      bool is_virtual;
    };
    std::vector<Probe> seq;
    seq.reserve(probes + 2);
    if (a.pole) {
      seq.push_back({{a.origin, 0.0}, -1.0, std::numeric_limits<double>::infinity(), true});
    } else {
      const ShiftedPoint pt{a.origin, a.tau};
      const Terms t = eval(pt, 1);
      if (s * t.f <= 0.0) return {true, false, pt};
      seq.push_back({pt, s * t.fp, s * t.f, false});
    }
    for (std::size_t k = 0; k < probes; ++k) {
      const double theta =
          0.5 * (1.0 - std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * probes)));
      const ShiftedPoint pt = at_fraction(a, b, theta);
      const Terms t = eval(pt, 1);
      if (s * t.f <= 0.0) return {true, false, pt};
      seq.push_back({pt, s * t.fp, s * t.f, false});
    }
    if (b.pole) {
      seq.push_back({{b.origin, 0.0}, 1.0, std::numeric_limits<double>::infinity(), true});
    } else {
      const ShiftedPoint pt{b.origin, b.tau};
      const Terms t = eval(pt, 1);
      if (s * t.f <= 0.0) return {true, false, pt};
      seq.push_back({pt, s * t.fp, s * t.f, false});
    }

    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      if (!(seq[k].sfp < 0.0 && seq[k + 1].sfp >= 0.0)) continue;
      auto r = refine_minimum(seq[k].pt, seq[k].is_virtual, seq[k + 1].pt, seq[k + 1].is_virtual, s);
      if (r.two) return r;
    }
    return {};
  }

  // Locates the minimum of s·f between lo (s·f' < 0) and hi (s·f' > 0).
  StationaryResult refine_minimum(ShiftedPoint lo_pt, bool lo_pole, ShiftedPoint hi_pt,
                                  bool hi_pole, int s) const {
    const auto& d = p_.d;
    // Work relative to the end that sits closer to its own pole.
    std::size_t o;
    if (lo_pole)
      o = lo_pt.origin;
    else if (hi_pole)
      o = hi_pt.origin;
    else
      o = std::abs(lo_pt.tau) <= std::abs(hi_pt.tau) ? lo_pt.origin : hi_pt.origin;
    double lo = rebase(d, lo_pt.origin, lo_pt.tau, o);
    double hi = rebase(d, hi_pt.origin, hi_pt.tau, o);
    double x = 0.5 * (lo + hi);
    if (lo_pole && lo == 0.0 && hi > 0.0) x = 0.5 * hi;
    if (hi_pole && hi == 0.0 && lo < 0.0) x = 0.5 * lo;
    Terms t{};
    const double ftol = 8.0 * static_cast<double>(std::max<std::size_t>(p_.size(), 1)) * kEps;
    for (int it = 0; it < 200; ++it) {
      t = sec_.eval(o, x, 2);
      if (s * t.f <= 0.0) return {true, false, {o, x}};
      const double g = s * t.fp;
      if (g == 0.0) break;
      if (g < 0.0)
        lo = x;
      else
        hi = x;
      if (hi - lo <= 4.0 * kEps * (std::abs(lo) + std::abs(hi))) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      double cand = t.fpp != 0.0 ? x - t.fp / t.fpp : mid;
      if (!(cand > lo && cand < hi)) cand = mid;
      // Guard against slow one-sided Newton progress.
      if (it % 3 == 2) cand = mid;
      x = cand;
    }
    if (s * t.f <= ftol * t.mag) return {true, true, {o, x}};
    return {};
  }

  // Number of eigenvalues below σ = d[o] + tau. Eliminating either block of
  // [[D - σ, V], [Vᵀ, -B⁻¹]] with B = diag(beta1, beta2) gives
  //   ν(D - σ + V·B·Vᵀ) = ν(D - σ) + π(B⁻¹ + Vᵀ(D - σ)⁻¹V) - π(B⁻¹)
  // where ν and π count negative and positive eigenvalues.
  std::size_t count_below(std::size_t o, double tau) const {
    const auto& d = p_.d;
    double c1 = 0, c2 = 0, c3 = 0;
    std::size_t neg = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double diff = (d[i] - d[o]) - tau;
      if (diff < 0.0) ++neg;
      const double t = 1.0 / diff;
      c1 += p_.v1[i] * p_.v1[i] * t;
      c2 += p_.v2[i] * p_.v2[i] * t;
      c3 += p_.v1[i] * p_.v2[i] * t;
    }
    flops::count({.adds = 4 * d.size(), .muls = 6 * d.size(), .divs = d.size()});
    const double m11 = 1.0 / p_.beta1 + c1;
    const double m22 = 1.0 / p_.beta2 + c2;
    // det(B⁻¹ + c) = f(σ)/(beta1·beta2); the secular form avoids the
    // cancellation m11·m22 - c3² suffers next to a pole.
    (void)c3;
    const double det = sec_.eval(o, tau, 0).f * ((p_.beta1 > 0.0) == (p_.beta2 > 0.0) ? 1.0 : -1.0);
    std::size_t pos = 0;
    if (det < 0.0)
      pos = 1;
    else if (m11 + m22 > 0.0)
      pos = det > 0.0 ? 2 : 1;
    const std::size_t pb = (p_.beta1 > 0.0) + (p_.beta2 > 0.0);
    if (neg + pos < pb) throw ClassificationError("negative inertia count");
    return neg + pos - pb;
  }

  // Offset from a pole used for inertia counts. Shifts are exact relative to
  // their origin, so this can sit far below any root's distance to the pole.
  double nudge(double value) const { return kEps * kEps * kEps * std::max(std::abs(value), scale_); }

  std::size_t count_at_end(const End& e, bool from_right) const {
    if (!e.pole) return count_below(e.origin, e.tau);
    const double v = p_.d[e.origin];
    return count_below(e.origin, from_right ? nudge(v) : -nudge(v));
  }

  // Splits an interval holding two roots by bisection on the inertia count.
  ShiftedPoint split_by_inertia(const End& a, const End& b) const {
    const std::size_t base = count_at_end(a, true);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const ShiftedPoint pt = at_fraction(a, b, mid);
      const std::size_t below = count_below(pt.origin, pt.tau);
      if (below == base + 1) return pt;
      if (below <= base)
        lo = mid;
      else
        hi = mid;
    }
    std::ostringstream msg;
    msg << "cannot separate the two roots between " << p_.d[a.origin] + a.tau << " and "
        << p_.d[b.origin] + b.tau;
    throw ClassificationError(msg.str());
  }

  void reset() {
    cls_.labels.assign(m_ + 1, IntervalLabel::Exterior);
    cls_.predicted_counts.assign(m_ + 1, 0);
    cls_.split.assign(m_ + 1, {});
    cls_.tangent.assign(m_ + 1, false);
    for (std::size_t j = 1; j < m_; ++j)
      cls_.labels[j] = left_sign(j) * right_sign(j) < 0 ? IntervalLabel::SMinus : IntervalLabel::SPlus;
  }

  bool classify(std::size_t probes) {
    const std::size_t r = p_.size();
    reset();
    std::size_t total = 0;
    for (std::size_t j = 0; j <= m_; ++j) {
      const int sl = left_sign(j);
      const int sr = right_sign(j);
      const bool interior = j > 0 && j < m_;
      std::size_t count = 0;
      if (sl != sr) {
        count = 1;
      } else {
        bool may_hold_two = interior;
        if (j == 0) may_hold_two = p_.beta1 < 0.0 && p_.beta2 < 0.0;
        if (j == m_) may_hold_two = p_.beta1 > 0.0 && p_.beta2 > 0.0;
        if (j == 0 && j == m_) may_hold_two = false;
        if (may_hold_two) {
          const auto res = stationary_test(left_end(j), right_end(j), sl, probes);
          if (res.two) {
            count = 2;
            cls_.split[j] = res.split;
            cls_.tangent[j] = res.tangent;
          }
        }
      }
      cls_.predicted_counts[j] = count;
      total += count;
    }
    return total == r;
  }

  void classify_by_inertia() {
    const std::size_t r = p_.size();
    reset();
    std::size_t total = 0;
    std::size_t prev = 0;  // count below the left end of the current interval
    for (std::size_t j = 0; j <= m_; ++j) {
      const std::size_t below_right = j == m_ ? r : count_at_end(right_end(j), false);
      if (j == 0) prev = 0;
      const std::size_t c = below_right >= prev ? below_right - prev : 0;
      if (below_right < prev || c > 2) {
        std::ostringstream msg;
        msg << "inertia count " << c << " in interval " << j << " is inconsistent";
        throw ClassificationError(msg.str());
      }
      cls_.predicted_counts[j] = c;
      cls_.tangent[j] = false;
      if (c == 2) cls_.split[j] = split_by_inertia(left_end(j), right_end(j));
      total += c;
      if (j < m_) prev = count_at_end(right_end(j), true);
    }
    if (total != r)
      throw ClassificationError("interval counts sum to " + std::to_string(total) +
                                " but the problem has order " + std::to_string(r));
    cls_.used_fallback = true;
  }

 private:
  const RankTwoProblem& p_;
  Secular2 sec_;
  IntervalClassification& cls_;
  std::size_t m_;
  double scale_ = 0.0;

 public:
  const Secular2& secular() const { return sec_; }
};

}  // namespace

SecularEvaluation secular_eval(const RankTwoProblem& p, double lambda) {
  if (p.v1.size() != p.size() || p.v2.size() != p.size())
    throw ArgumentError("secular_eval: length mismatch");
  if (p.size() == 0) return {1.0, 0.0};
  std::size_t k = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (std::abs(lambda - p.d[i]) < std::abs(lambda - p.d[k])) k = i;
  const double tau = lambda - p.d[k];
  if (std::abs(tau) <= 2.0 * kEps * std::max(std::abs(lambda), std::abs(p.d[k])))
    throw PoleError("secular_eval: lambda coincides with pole d[" + std::to_string(k) + "]");
  const Terms t = Secular2(p).eval(k, tau, 1);
  return {t.f, t.fp};
}

IntervalClassification g_signs(const RankTwoProblem& p) {
  require_sorted(p, "g_signs");
  IntervalClassification cls;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && p.d[j] == p.d[i]) ++j;
    cls.values.push_back(p.d[i]);
    cls.first.push_back(i);
    cls.multiplicity.push_back(j - i);
    if (j - i == 1) {
      double cross = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        const double m = p.v1[i] * p.v2[r] - p.v1[r] * p.v2[i];
        cross += m * m / (p.d[r] - p.d[i]);
      }
      const double gp = -p.beta1 * p.beta2 * cross - p.beta1 * p.v1[i] * p.v1[i] -
                        p.beta2 * p.v2[i] * p.v2[i];
      cls.gplus.push_back(gp);
      cls.gminus.push_back(-gp);
    } else {
      cls.gplus.push_back(p.beta1 * p.beta2);
      cls.gminus.push_back(p.beta1 * p.beta2);
    }
    i = j;
  }
  flops::count({.adds = 3 * n * n, .muls = 3 * n * n, .divs = n * n});
  return cls;
}

namespace {

// g signs plus the outer bounds; false for an empty problem, which is then
// fully classified.
bool prepare(const RankTwoProblem& p, IntervalClassification& cls) {
  cls = g_signs(p);
  const std::size_t r = p.size();
  if (r == 0) {
    cls.labels = {IntervalLabel::Exterior};
    cls.predicted_counts = {0};
    cls.split = {ShiftedPoint{}};
    cls.tangent = {false};
    return false;
  }
  double n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    n1 += p.v1[i] * p.v1[i];
    n2 += p.v2[i] * p.v2[i];
  }
  const double up = std::max(p.beta1, 0.0) * n1 + std::max(p.beta2, 0.0) * n2;
  const double down = std::max(-p.beta1, 0.0) * n1 + std::max(-p.beta2, 0.0) * n2;
  const double lo_d = cls.values.front();
  const double hi_d = cls.values.back();
  cls.upper_bound = hi_d + up + 8.0 * kEps * (std::abs(hi_d) + up);
  cls.lower_bound = lo_d - down - 8.0 * kEps * (std::abs(lo_d) + down);
  return true;
}

}  // namespace

IntervalClassification classify_intervals(const RankTwoProblem& p) {
  IntervalClassification cls;
  if (!prepare(p, cls)) return cls;
  Classifier c(p, cls);
  for (std::size_t probes : {8u, 32u, 128u})
    if (c.classify(probes)) return cls;
  c.classify_by_inertia();
  return cls;
}

IntervalClassification classify_intervals_by_inertia(const RankTwoProblem& p) {
  IntervalClassification cls;
  if (!prepare(p, cls)) return cls;
  Classifier c(p, cls);
  c.classify_by_inertia();
  return cls;
}

// Zero of branch k in interval j with ends e[0], e[1], started from the
// interval's split point. The result is re-solved relative to the nearer
// pole so that gaps to it keep their relative accuracy.
ShiftedPoint solve_branch(const Classifier& c, const End (&e)[2], const ShiftedPoint& start,
                          int k, std::size_t j) {
  const auto& d = c.secular().problem().d;
  auto run = [&](std::size_t o, double x0) {
    const double lo = rebase(d, e[0].origin, e[0].tau, o);
    const double hi = rebase(d, e[1].origin, e[1].tau, o);
    auto eval = [&](double tau) { return branch_point(c.secular(), o, tau, k); };
    const auto root = detail::solve_bracketed(eval, lo, hi, -1, x0, eval(x0));
    if (!(root.tau >= lo && root.tau <= hi) || !std::isfinite(root.tau)) {
      std::ostringstream msg;
      msg << "branch root in interval " << j << " escaped its bracket";
      throw RootExtractionError(msg.str());
    }
    return ShiftedPoint{o, root.tau};
  };
  ShiftedPoint r = run(start.origin, start.tau);
  std::size_t nearest = r.origin;
  double best = std::numeric_limits<double>::infinity();
  for (const End& end : e) {
    if (!end.pole) continue;
    const double gap = std::abs(rebase(d, r.origin, r.tau, end.origin));
    if (gap < best) {
      best = gap;
      nearest = end.origin;
    }
  }
  if (nearest != r.origin) r = run(nearest, rebase(d, r.origin, r.tau, nearest));
  return r;
}

RankTwoRoots rank_two_roots(const RankTwoProblem& p, const IntervalClassification& cls_in) {
  require_sorted(p, "secular_roots");
  RankTwoRoots out;
  const std::size_t r = p.size();
  if (r == 0) return out;
  std::size_t predicted = 0;
  for (std::size_t c : cls_in.predicted_counts) predicted += c;
  if (predicted != r || cls_in.predicted_counts.size() != cls_in.values.size() + 1)
    throw ArgumentError("secular_roots: classification does not match the problem");

  IntervalClassification cls = cls_in;
  Classifier c(p, cls);
  const auto& d = p.d;

  auto solve = [&](std::size_t j, const End& a, const End& b, int sign_left) {
    // Choose the half by the sign at the midpoint, then work relative to the
    // pole adjacent to that half.
    const ShiftedPoint mid = c.at_fraction(a, b, 0.5);
    const Terms tm = c.eval(mid, 1);
    const bool root_right = tm.f != 0.0 && sgn(tm.f) == sign_left;
    const End& near = root_right ? b : a;
    const End& far = root_right ? a : b;
    std::size_t o = near.pole ? near.origin : (far.pole ? far.origin : mid.origin);
    double lo, hi;
    const double tmid = rebase(d, mid.origin, mid.tau, o);
    if (root_right) {
      lo = tmid;
      hi = rebase(d, b.origin, b.tau, o);
    } else {
      lo = rebase(d, a.origin, a.tau, o);
      hi = tmid;
    }
    if (tm.f == 0.0) {
      out.origin.push_back(o);
      out.tau.push_back(tmid);
      out.lambda.push_back(d[o] + tmid);
      return;
    }
    auto eval = [&](double tau) {
      const Terms t = c.secular().eval(o, tau, 1);
      return to_point(t);
    };
    // The pole split must refer to the origin the solver works from.
    const detail::SecularPoint p0 = mid.origin == o ? to_point(tm) : eval(tmid);
    const auto root = detail::solve_bracketed(eval, lo, hi, sign_left, tmid, p0);
    if (!(root.tau >= lo && root.tau <= hi) || !std::isfinite(root.tau)) {
      std::ostringstream msg;
      msg << "root in interval " << j << " escaped its bracket [" << d[o] + lo << ", "
          << d[o] + hi << "]";
      throw RootExtractionError(msg.str());
    }
    out.origin.push_back(o);
    out.tau.push_back(root.tau);
    out.lambda.push_back(d[o] + root.tau);
  };

  for (std::size_t j = 0; j < cls.interval_count(); ++j) {
    const std::size_t count = cls.predicted_counts[j];
    if (count == 0) continue;
    const End a = c.left_end(j);
    const End b = c.right_end(j);
    const int sl = c.left_sign(j);
    if (count == 1) {
      solve(j, a, b, sl);
    } else {
      // Two roots: the zero of the upper branch of S comes first.
      const ShiftedPoint s = cls.split[j];
      const End pair[2] = {a, b};
      for (int k = 2; k >= 1; --k) {
        const ShiftedPoint root = solve_branch(c, pair, s, k, j);
        out.origin.push_back(root.origin);
        out.tau.push_back(root.tau);
        out.lambda.push_back(d[root.origin] + root.tau);
      }
    }
  }
  return out;
}

std::vector<double> secular_roots(const RankTwoProblem& p, const IntervalClassification& cls) {
  return rank_two_roots(p, cls).lambda;
}

}  // namespace rtdc
