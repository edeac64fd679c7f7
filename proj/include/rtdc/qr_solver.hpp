#pragma once

#include <vector>

#include "rtdc/matrix.hpp"
#include "rtdc/tridiag.hpp"

namespace rtdc {

/// Eigenvalues in ascending order; when vectors were requested, column j of
/// `vectors` is a unit eigenvector for eigenvalues[j].
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  Matrix vectors;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  bool has_vectors() const noexcept { return !vectors.empty(); }
};

/// Implicit symmetric QR with Wilkinson shifts. Off-diagonal entries are
/// dropped once |e_i| <= eps * (|d_i| + |d_{i+1}|). Throws ConvergenceError
/// after 30n sweeps.
SpectralDecomposition qr_eigensolve(const SymTridiag& t, bool want_vectors = true);

/// Householder reduction, qr_eigensolve, then back-transformation.
SpectralDecomposition dense_eigensolve(const DenseSym& a);

/// Flips columns so the first significant component (magnitude above
/// sqrt(eps) times the column max) is positive.
void normalize_signs(Matrix& vectors);

/// Sorts eigenvalues ascending and permutes vector columns to match.
/// Stable, so equal eigenvalues keep their incoming order.
void sort_decomposition(SpectralDecomposition& dec);

}  // namespace rtdc
