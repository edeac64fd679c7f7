#pragma once

#include <cstddef>
#include <vector>

#include "rtdc/matrix.hpp"
#include "rtdc/ortho_transform.hpp"
#include "rtdc/qr_solver.hpp"
#include "rtdc/tridiag.hpp"

namespace rtdc {

/// D + beta·v·vᵀ with D = diag(d).
struct RankOneProblem {
  std::vector<double> d;
  std::vector<double> v;
  double beta = 0.0;

  std::size_t size() const noexcept { return d.size(); }
  Matrix dense() const;
};

/// An eigenpair found during deflation, with the vector in the coordinates
/// of the undeflated problem.
struct ResolvedPair {
  double eigenvalue = 0.0;
  std::vector<double> vector;
};

struct RankOneDeflation {
  /// Working indices of the survivors, in the order of `reduced`.
  std::vector<std::size_t> keep;
  std::vector<ResolvedPair> resolved;
  /// Working index i holds original index perm[i] (ascending d).
  std::vector<std::size_t> perm;
  /// Rotations that merged nearly equal diagonal entries.
  std::vector<OrthoTransform::Givens> givens;
  /// perm and givens combined; maps working coordinates to original ones.
  OrthoTransform basis;
  /// Survivors: strictly increasing d, every |v_i| above the tolerance.
  RankOneProblem reduced;
};

/// 8·eps·max(‖d‖∞, |beta|·‖v‖²).
double rank_one_tolerance(const RankOneProblem& p);

/// Removes components that cannot move an eigenvalue by more than `tol`:
/// entries with |beta|·|v_i|·‖v‖ <= tol, and pairs of diagonal entries close
/// enough that a rotation zeroing one v component leaves a coupling <= tol.
RankOneDeflation cdc_deflate(const RankOneProblem& p, double tol);

/// Secular roots kept as (pole index, offset) so that lambda - d_i can be
/// formed without cancellation.
struct RankOneRoots {
  std::vector<double> lambda;
  std::vector<std::size_t> origin;
  std::vector<double> tau;

  std::size_t size() const noexcept { return lambda.size(); }
  /// lambda_j - d_i evaluated through the stored offset.
  double gap(const std::vector<double>& d, std::size_t i, std::size_t j) const {
    return (d[origin[j]] - d[i]) + tau[j];
  }
};

/// Roots of 1 + beta·Σ v_i²/(d_i - lambda) for a deflated problem (strictly
/// increasing d, nonzero v). Root j lies in (d_j, d_{j+1}) when beta > 0 and
/// in (d_{j-1}, d_j) when beta < 0, with the outermost interval bounded by
/// beta·‖v‖².
RankOneRoots rank_one_roots(const RankOneProblem& p);
std::vector<double> cdc_secular_roots(const RankOneProblem& p);

/// Eigenvectors of a deflated problem from recomputed modification vector
/// entries (product formula), so the columns stay orthogonal even for
/// clustered roots. Throws InternalConsistencyError if the roots do not
/// interlace d.
Matrix cdc_stable_vectors(const RankOneProblem& p, const RankOneRoots& roots);
Matrix cdc_stable_vectors(const RankOneProblem& p, const std::vector<double>& roots);

/// Complete eigendecomposition of D + beta·v·vᵀ (any order of d): deflation,
/// secular roots and stable vectors. Eigenvalues ascending; ties keep
/// deflated pairs first.
SpectralDecomposition rank_one_eigensystem(const RankOneProblem& p);

/// Rank-one divide and conquer on a tridiagonal matrix. Blocks of order
/// <= base_cutoff go to qr_eigensolve. With threads > 1 the two halves of a
/// split are solved concurrently.
SpectralDecomposition cdc_solve(const SymTridiag& t, std::size_t base_cutoff = 25,
                                unsigned threads = 1);

}  // namespace rtdc
