#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "rtdc/matrix.hpp"
#include "rtdc/ortho_transform.hpp"
#include "rtdc/qr_solver.hpp"
#include "rtdc/tridiag.hpp"

namespace rtdc {

/// D + beta1·v1·v1ᵀ + beta2·v2·v2ᵀ with D = diag(d).
struct RankTwoProblem {
  std::vector<double> d;
  std::vector<double> v1;
  std::vector<double> v2;
  double beta1 = 0.0;
  double beta2 = 0.0;

  std::size_t size() const noexcept { return d.size(); }
  Matrix dense() const;
};

/// Block diagonal Q of the three subproblem decompositions together with
/// the merged problem Qᵀ·A·Q.
RankTwoProblem form_rank_two(const ThreeWaySplit& split, const SpectralDecomposition& dec1,
                             const SpectralDecomposition& dec2,
                             const SpectralDecomposition& dec3);
Matrix block_q(const SpectralDecomposition& dec1, const SpectralDecomposition& dec2,
               const SpectralDecomposition& dec3);

enum class DeflationCase {
  NullBoth,                 ///< both components negligible
  NullV1,                   ///< v1 component negligible, discriminant vanished
  NullV2,                   ///< v2 component negligible, discriminant vanished
  RepeatedRank2,            ///< repeated d whose (v1, v2) rows have rank 2
  RepeatedRank1Orthogonal,  ///< repeated d whose rows have rank 1
  RepeatedRank1Discriminant,
  NotDeflated,
};

std::string_view case_name(DeflationCase c);

struct ResolvedEigenpair {
  double eigenvalue = 0.0;
  /// Unit vector in the coordinates of the undeflated problem.
  std::vector<double> vector;
  DeflationCase kind = DeflationCase::NotDeflated;
};

struct RankTwoDeflation {
  std::vector<ResolvedEigenpair> resolved;
  /// d ascending; a value occurs at most twice, and a repeated pair has
  /// linearly independent (v1, v2) rows.
  RankTwoProblem reduced;
  /// Working indices of the survivors, in the order of `reduced`.
  std::vector<std::size_t> keep;
  /// Working index i starts as original index perm[i] (ascending d).
  std::vector<std::size_t> perm;
  /// Maps working coordinates back to the undeflated problem.
  OrthoTransform basis;
  /// Case assigned to each original index.
  std::vector<DeflationCase> labels;
  double tolerance = 0.0;
};

/// 8·eps·max(‖d‖∞, |beta1|·‖v1‖², |beta2|·‖v2‖²).
double rank_two_tolerance(const RankTwoProblem& p);

/// Deflation by case analysis. A component counts as negligible when
/// |beta_k|·|v_ki|·‖v_k‖ <= tol; diagonal entries within tol of each other
/// form a repeated cluster. Every simple entry is tested for d_i being an
/// eigenvalue: directly when one component is negligible, otherwise after
/// rewriting the modification so that the first vector vanishes at i. A
/// discriminant counts as zero when |f(d_i)| <= n·8·eps·(sum of |terms|).
RankTwoDeflation deflate_rank_two(const RankTwoProblem& p, double tol);
RankTwoDeflation deflate_rank_two(const RankTwoProblem& p);

struct SecularEvaluation {
  double value = 0.0;
  double derivative = 0.0;
};

/// f(λ) = beta1·beta2·(c1·c2 - c3²) - beta1·c1 - beta2·c2 + 1 with
/// c1 = Σ v1²/(λ-d), c2 = Σ v2²/(λ-d), c3 = Σ v1·v2/(λ-d), and f'(λ).
/// Throws PoleError when λ is within 2·eps (relative) of some d_i.
SecularEvaluation secular_eval(const RankTwoProblem& p, double lambda);

enum class IntervalLabel { Exterior, SPlus, SMinus };

/// A point written as d[origin] + tau.
struct ShiftedPoint {
  std::size_t origin = 0;
  double tau = 0.0;
};

/// Intervals are I_0 = (-inf, u_0), I_j = (u_{j-1}, u_j), I_m = (u_{m-1}, inf)
/// over the distinct diagonal values u_0 < ... < u_{m-1}.
struct IntervalClassification {
  std::vector<double> values;
  /// Index in the problem's d of the first occurrence of each value.
  std::vector<std::size_t> first;
  std::vector<std::size_t> multiplicity;
  /// Sign-carrying coefficients of the one-sided pole behaviour of f.
  std::vector<double> gplus;
  std::vector<double> gminus;

  std::vector<IntervalLabel> labels;
  std::vector<std::size_t> predicted_counts;
  /// For two-root intervals: a point where f has the sign opposite to its
  /// endpoint limits, or the stationary point of a tangency.
  std::vector<ShiftedPoint> split;
  std::vector<bool> tangent;
  /// Finite bounds on the spectrum, used for the exterior intervals.
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  /// Counting fell back to exact inertia.
  bool used_fallback = false;

  std::size_t interval_count() const noexcept { return values.size() + 1; }
};

/// Unique values, multiplicities, g⁺ and g⁻ only.
IntervalClassification g_signs(const RankTwoProblem& p);

/// Predicted root count in every interval. Throws ClassificationError if no
/// consistent count can be established.
IntervalClassification classify_intervals(const RankTwoProblem& p);

/// Same result computed from eigenvalue counts (Sylvester inertia) instead of
/// stationary points. classify_intervals falls back to it when the counts it
/// derives do not add up.
IntervalClassification classify_intervals_by_inertia(const RankTwoProblem& p);

struct RankTwoRoots {
  std::vector<double> lambda;
  std::vector<std::size_t> origin;
  std::vector<double> tau;

  std::size_t size() const noexcept { return lambda.size(); }
  /// lambda_j - d_i formed through the stored offset.
  double gap(const std::vector<double>& d, std::size_t i, std::size_t j) const {
    return (d[origin[j]] - d[i]) + tau[j];
  }
};

/// Roots of f, ascending, one bracketed solve per root.
RankTwoRoots rank_two_roots(const RankTwoProblem& p, const IntervalClassification& cls);
std::vector<double> secular_roots(const RankTwoProblem& p, const IntervalClassification& cls);

/// Eigenvectors from x = a·(λ-D)⁻¹v1 + b·(λ-D)⁻¹v2 with (a, b) from the 2x2
/// homogeneous system. Columns are unit length; clustered columns are not
/// reorthogonalized, so orthogonality degrades with tight root clusters.
Matrix rank_two_vectors(const RankTwoProblem& p, const RankTwoRoots& roots);
Matrix rank_two_vectors(const RankTwoProblem& p, const std::vector<double>& roots);

/// Eigendecomposition of the merged problem as two successive rank-one
/// updates: first diag(D1, D2) + beta1·v1·v1ᵀ over the leading `k12`
/// entries (v1 must vanish beyond them), then the second modification in
/// that basis. Orthogonal to working precision.
SpectralDecomposition rank_two_vectors_stable(const RankTwoProblem& p, std::size_t k12);

/// Eigenvalues ascending with eigenvectors of an arbitrary merged problem
/// (deflation, classification, roots, then vectors by the chosen method).
/// `k12` is needed only for stable vectors.
SpectralDecomposition rank_two_eigensystem(const RankTwoProblem& p, bool stable_vectors,
                                           std::size_t k12);

struct RtdcOptions {
  std::size_t base_cutoff = 25;
  bool stable_vectors = true;
  unsigned threads = 1;
};

/// Rank-two divide and conquer. Blocks of order <= base_cutoff are solved by
/// implicit QR; larger ones are cut in three near-equal parts.
SpectralDecomposition rtdc_solve(const SymTridiag& t, const RtdcOptions& options = {});
SpectralDecomposition rtdc_solve(const SymTridiag& t, std::size_t base_cutoff, bool stable);

}  // namespace rtdc
