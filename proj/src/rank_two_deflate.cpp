#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"
#include "rtdc/rank_one.hpp"
#include "rtdc/rank_two.hpp"

namespace rtdc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double y : x) s += y * y;
  flops::count({.adds = x.size(), .muls = x.size(), .sqrts = 1});
  return std::sqrt(s);
}

// p x p Householder reflector H with H·x = (alpha, 0, ..., 0) acting on the
// trailing rows starting at `from`.
Matrix householder(const std::vector<double>& x, std::size_t from) {
  const std::size_t p = x.size();
  Matrix h = Matrix::identity(p);
  double sigma = 0.0;
  for (std::size_t i = from; i < p; ++i) sigma += x[i] * x[i];
  const double nrm = std::sqrt(sigma);
  if (nrm == 0.0) return h;
  std::vector<double> u(x);
  for (std::size_t i = 0; i < from; ++i) u[i] = 0.0;
  const double alpha = x[from] >= 0.0 ? -nrm : nrm;
  u[from] -= alpha;
  double uu = 0.0;
  for (std::size_t i = from; i < p; ++i) uu += u[i] * u[i];
  if (uu == 0.0) return h;
  for (std::size_t j = from; j < p; ++j)
    for (std::size_t i = from; i < p; ++i) h(i, j) -= 2.0 * u[i] * u[j] / uu;
  flops::count({.adds = 2 * p + p * p, .muls = 2 * p + 2 * p * p, .divs = p * p, .sqrts = 1});
  return h;
}

struct Pending {
  std::size_t slot;
  double value;
  DeflationCase kind;
  std::vector<double> vec;  // explicit vector in original coordinates, or empty
};

class Deflator {
 public:
  Deflator(const RankTwoProblem& p, double tol) : tol_(tol), n_(p.size()) {
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), 0);
    std::stable_sort(perm_.begin(), perm_.end(),
                     [&](std::size_t a, std::size_t b) { return p.d[a] < p.d[b]; });
    basis_ = OrthoTransform(perm_);
    d_.resize(n_);
    v1_.resize(n_);
    v2_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      d_[i] = p.d[perm_[i]];
      v1_[i] = p.v1[perm_[i]];
      v2_[i] = p.v2[perm_[i]];
    }
    b1_ = p.beta1;
    b2_ = p.beta2;
    alive_.assign(n_, true);
    rank1_survivor_.assign(n_, false);
  }

  RankTwoDeflation run() {
    for (int pass = 0; pass < 8; ++pass) {
      drop_negligible();
      process_clusters();
      if (!try_discriminants()) break;
    }
    return finish();
  }

 private:
  std::vector<std::size_t> alive_sorted() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n_; ++i)
      if (alive_[i]) out.push_back(i);
    std::stable_sort(out.begin(), out.end(),
                     [&](std::size_t a, std::size_t b) { return d_[a] < d_[b]; });
    return out;
  }

  double scale1() const { return std::abs(b1_) * norm2(v1_); }
  double scale2() const { return std::abs(b2_) * norm2(v2_); }

  void resolve_slot(std::size_t i, double value, DeflationCase kind) {
    alive_[i] = false;
    v1_[i] = 0.0;
    v2_[i] = 0.0;
    pending_.push_back({i, value, kind, {}});
  }

  // Case 1, plus zeroing of single negligible components.
  void drop_negligible() {
    const double s1 = scale1();
    const double s2 = scale2();
    for (std::size_t i = 0; i < n_; ++i) {
      if (!alive_[i]) continue;
      if (s1 * std::abs(v1_[i]) <= tol_) v1_[i] = 0.0;
      if (s2 * std::abs(v2_[i]) <= tol_) v2_[i] = 0.0;
      if (v1_[i] == 0.0 && v2_[i] == 0.0) resolve_slot(i, d_[i], DeflationCase::NullBoth);
    }
    flops::count({.muls = 2 * n_});
  }

  // Case 4: clusters of (numerically) equal d.
  void process_clusters() {
    std::fill(rank1_survivor_.begin(), rank1_survivor_.end(), false);
    const auto order = alive_sorted();
    for (std::size_t a = 0; a < order.size();) {
      std::size_t b = a + 1;
      while (b < order.size() && d_[order[b]] - d_[order[a]] <= tol_) ++b;
      if (b - a >= 2) {
        std::vector<std::size_t> cluster(order.begin() + a, order.begin() + b);
        reduce_cluster(cluster);
      }
      a = b;
    }
  }

  void reduce_cluster(const std::vector<std::size_t>& s) {
    const std::size_t p = s.size();
    const double s1 = scale1();
    const double s2 = scale2();
    double mean = 0.0;
    for (std::size_t i : s) mean += d_[i];
    mean /= static_cast<double>(p);

    std::vector<double> c1(p), c2(p);
    for (std::size_t k = 0; k < p; ++k) {
      c1[k] = s1 * v1_[s[k]];
      c2[k] = s2 * v2_[s[k]];
    }
    const bool swap = norm2(c2) > norm2(c1);
    std::vector<double>& lead = swap ? c2 : c1;
    std::vector<double>& other = swap ? c1 : c2;

    const Matrix h1 = householder(lead, 0);
    std::vector<double> other1(p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = 0; k < p; ++k) other1[i] += h1(i, k) * other[k];
    double tail = 0.0;
    for (std::size_t i = 1; i < p; ++i) tail += other1[i] * other1[i];
    const bool rank_two = std::sqrt(tail) > tol_;
    flops::count({.adds = p * p + p, .muls = p * p + p, .sqrts = 1});

    if (rank_two && p == 2) {
      for (std::size_t i : s) d_[i] = mean;
      return;
    }
    Matrix u = h1;
    if (rank_two) u = h1 * householder(other1, 1);

    // New coordinates: v_new = uᵀ·v_old over the cluster.
    std::vector<double> n1(p, 0.0), n2(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < p; ++k) {
        n1[j] += u(k, j) * v1_[s[k]];
        n2[j] += u(k, j) * v2_[s[k]];
      }
    flops::count({.adds = 2 * p * p, .muls = 2 * p * p});
    basis_.push(OrthoTransform::Block{s, u});

    const std::size_t rank = rank_two ? 2 : 1;
    for (std::size_t k = 0; k < p; ++k) {
      const std::size_t i = s[k];
      d_[i] = mean;
      if (k < rank) {
        v1_[i] = n1[k];
        v2_[i] = n2[k];
      } else {
        resolve_slot(i, mean, rank_two ? DeflationCase::RepeatedRank2
                                       : DeflationCase::RepeatedRank1Orthogonal);
      }
    }
    if (rank_two) {
      // The second row carries only the non-pivot component.
      (swap ? v2_ : v1_)[s[1]] = 0.0;
    } else {
      const std::size_t m = s[0];
      if (s1 * std::abs(v1_[m]) <= tol_) v1_[m] = 0.0;
      if (s2 * std::abs(v2_[m]) <= tol_) v2_[m] = 0.0;
      rank1_survivor_[m] = v1_[m] != 0.0 && v2_[m] != 0.0;
    }
  }

  bool is_simple(std::size_t i) const {
    for (std::size_t q = 0; q < n_; ++q)
      if (q != i && alive_[q] && d_[q] == d_[i]) return false;
    return true;
  }

  // 1 + beta·Σ_{q≠i} w_q²/(d_q - d_i) and whether it counts as zero.
  bool discriminant_vanishes(const std::vector<double>& w, double beta, std::size_t i) const {
    double f = 1.0;
    double mag = 1.0;
    std::size_t live = 0;
    for (std::size_t q = 0; q < n_; ++q) {
      if (q == i || !alive_[q]) continue;
      ++live;
      const double term = beta * w[q] * w[q] / (d_[q] - d_[i]);
      f += term;
      mag += std::abs(term);
    }
    flops::count({.adds = 3 * live, .muls = 2 * live, .divs = live});
    return std::abs(f) <= static_cast<double>(n_) * 8.0 * kEps * mag;
  }

  bool try_discriminants() {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!alive_[i] || !is_simple(i)) continue;
      if (v1_[i] == 0.0 && v2_[i] != 0.0) {
        if (discriminant_vanishes(v1_, b1_, i)) {
          fire(i, /*null_is_v1=*/true, DeflationCase::NullV1);
          return true;
        }
      } else if (v2_[i] == 0.0 && v1_[i] != 0.0) {
        if (discriminant_vanishes(v2_, b2_, i)) {
          fire(i, /*null_is_v1=*/false, DeflationCase::NullV2);
          return true;
        }
      } else if (v1_[i] != 0.0 && v2_[i] != 0.0) {
        // Rewrite the modification so that the first vector vanishes at i:
        //   w1 = a·v1 + b·v2, w2 = b·beta1·v1 - a·beta2·v2 with
        //   (a, b) ∝ (v2_i, -v1_i), q = a²·beta2 + b²·beta1,
        //   beta1' = beta1·beta2/q, beta2' = 1/q.
        const double h = std::hypot(v1_[i], v2_[i]);
        const double a = v2_[i] / h;
        const double b = -v1_[i] / h;
        const double q = a * a * b2_ + b * b * b1_;
        if (std::abs(q) <= 8.0 * kEps * (a * a * std::abs(b2_) + b * b * std::abs(b1_))) continue;
        std::vector<double> w1(n_), w2(n_);
        for (std::size_t k = 0; k < n_; ++k) {
          w1[k] = a * v1_[k] + b * v2_[k];
          w2[k] = b * b1_ * v1_[k] - a * b2_ * v2_[k];
        }
        w1[i] = 0.0;
        flops::count({.adds = 2 * n_ + 3, .muls = 6 * n_ + 8, .divs = 2, .sqrts = 1});
        const double nb1 = b1_ * b2_ / q;
        if (discriminant_vanishes(w1, nb1, i)) {
          v1_ = std::move(w1);
          v2_ = std::move(w2);
          b1_ = nb1;
          b2_ = 1.0 / q;
          fire(i, true,
               rank1_survivor_[i] ? DeflationCase::RepeatedRank1Discriminant
                                  : DeflationCase::NullV1);
          return true;
        }
      }
    }
    return false;
  }

  // d_i is an eigenvalue. With y the vanishing component vector and z the
  // other one: x_q = y_q/(d_q - d_i) for q ≠ i and x_i from zᵀx = 0. The
  // remaining problem is rebuilt in the eigenbasis of B = D_{-i} + beta_y·y·yᵀ,
  // where the y term is absorbed into the diagonal.
  void fire(std::size_t i, bool null_is_v1, DeflationCase kind) {
    std::vector<double>& y = null_is_v1 ? v1_ : v2_;
    std::vector<double>& z = null_is_v1 ? v2_ : v1_;
    const double beta_y = null_is_v1 ? b1_ : b2_;

    std::vector<double> x(n_, 0.0);
    double zx = 0.0;
    for (std::size_t q = 0; q < n_; ++q) {
      if (q == i || !alive_[q]) continue;
      x[q] = y[q] / (d_[q] - d_[i]);
      zx += z[q] * x[q];
    }
    x[i] = -zx / z[i];
    const double nx = norm2(x);
    for (double& e : x) e /= nx;
    flops::count({.adds = 3 * n_, .muls = 2 * n_, .divs = 2 * n_});
    {
      flops::PhaseScope phase(Phase::vectors, true);
      pending_.push_back({i, d_[i], kind, basis_.apply(x)});
    }

    std::vector<std::size_t> rest;
    for (std::size_t q = 0; q < n_; ++q)
      if (q != i && alive_[q]) rest.push_back(q);
    RankOneProblem bp;
    bp.beta = beta_y;
    for (std::size_t q : rest) {
      bp.d.push_back(d_[q]);
      bp.v.push_back(y[q]);
    }
    SpectralDecomposition e;
    {
      flops::PhaseScope phase(flops::current_phase(), true);
      e = rank_one_eigensystem(bp);
    }
    const std::size_t m = rest.size();
    std::vector<double> zr(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) zr[j] += e.vectors(k, j) * z[rest[k]];
    flops::count({.adds = m * m, .muls = m * m});
    for (std::size_t j = 0; j < m; ++j) {
      d_[rest[j]] = e.eigenvalues[j];
      y[rest[j]] = 0.0;
      z[rest[j]] = zr[j];
    }
    y[i] = 0.0;
    basis_.push(OrthoTransform::Block{rest, e.vectors});

    // The eigenvalue d_i now appears twice; drop the combination that is
    // orthogonal to z, which is the vector recorded above.
    std::size_t partner = n_;
    for (std::size_t q : rest)
      if (partner == n_ || std::abs(d_[q] - d_[i]) < std::abs(d_[partner] - d_[i])) partner = q;
    if (partner == n_) return;
    const double r = std::hypot(z[partner], z[i]);
    if (r == 0.0) {
      alive_[partner] = false;
      return;
    }
    const double c = z[i] / r;
    const double s = z[partner] / r;
    basis_.push(OrthoTransform::Givens{partner, i, c, s});
    d_[i] = s * s * d_[partner] + c * c * d_[i];
    z[i] = r;
    z[partner] = 0.0;
    alive_[partner] = false;
    flops::count({.adds = 2, .muls = 8, .divs = 2, .sqrts = 1});
  }

  RankTwoDeflation finish() {
    RankTwoDeflation out;
    out.tolerance = tol_;
    out.perm = perm_;
    out.labels.assign(n_, DeflationCase::NotDeflated);
    const auto order = alive_sorted();
    out.keep = order;
    out.reduced.beta1 = b1_;
    out.reduced.beta2 = b2_;
    for (std::size_t i : order) {
      out.reduced.d.push_back(d_[i]);
      out.reduced.v1.push_back(v1_[i]);
      out.reduced.v2.push_back(v2_[i]);
    }
    // Eigenvector work, not needed for the eigenvalues.
    flops::PhaseScope phase(Phase::vectors, true);
    for (auto& pd : pending_) {
      out.labels[perm_[pd.slot]] = pd.kind;
      std::vector<double> vec = pd.vec.empty() ? basis_.column(pd.slot) : std::move(pd.vec);
      out.resolved.push_back({pd.value, std::move(vec), pd.kind});
    }
    out.basis = std::move(basis_);
    return out;
  }

  double tol_;
  std::size_t n_;
  std::vector<std::size_t> perm_;
  OrthoTransform basis_;
  std::vector<double> d_, v1_, v2_;
  double b1_ = 0.0, b2_ = 0.0;
  std::vector<bool> alive_;
  std::vector<bool> rank1_survivor_;
  std::vector<Pending> pending_;
};

}  // namespace

Matrix RankTwoProblem::dense() const {
  const std::size_t n = size();
  Matrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i)
      a(i, j) = a(j, i) = beta1 * (v1[i] * v1[j]) + beta2 * (v2[i] * v2[j]);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += d[i];
  return a;
}

std::string_view case_name(DeflationCase c) {
  switch (c) {
    case DeflationCase::NullBoth: return "null-both";
    case DeflationCase::NullV1: return "null-v1";
    case DeflationCase::NullV2: return "null-v2";
    case DeflationCase::RepeatedRank2: return "repeated-rank2";
    case DeflationCase::RepeatedRank1Orthogonal: return "repeated-rank1-orthogonal";
    case DeflationCase::RepeatedRank1Discriminant: return "repeated-rank1-discriminant";
    case DeflationCase::NotDeflated: return "not-deflated";
  }
  return "unknown";
}

double rank_two_tolerance(const RankTwoProblem& p) {
  double dmax = 0.0;
  for (double x : p.d) dmax = std::max(dmax, std::abs(x));
  const double n1 = norm2(p.v1);
  const double n2 = norm2(p.v2);
  const double tol =
      8.0 * kEps * std::max({dmax, std::abs(p.beta1) * n1 * n1, std::abs(p.beta2) * n2 * n2});
  return std::max(tol, std::numeric_limits<double>::min());
}

RankTwoDeflation deflate_rank_two(const RankTwoProblem& p, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("deflate_rank_two: tolerance must be positive");
  if (p.v1.size() != p.size() || p.v2.size() != p.size())
    throw ArgumentError("deflate_rank_two: length mismatch");
  return Deflator(p, tol).run();
}

RankTwoDeflation deflate_rank_two(const RankTwoProblem& p) {
  return deflate_rank_two(p, rank_two_tolerance(p));
}

}  // namespace rtdc
