#pragma once

// Plumbing shared by the two divide-and-conquer drivers.

#include <algorithm>
#include <cstddef>
#include <future>
#include <optional>
#include <span>
#include <vector>

#include "rtdc/flops.hpp"
#include "rtdc/matrix.hpp"
#include "rtdc/qr_solver.hpp"
#include "rtdc/rank_one.hpp"
#include "rtdc/tridiag.hpp"

namespace rtdc::detail {

/// diag(blocks...) · x; block row sizes must add up to x.rows().
Matrix block_diag_times(std::span<const Matrix* const> blocks, const Matrix& x);

/// Indices i with offdiag[i] == 0 exactly.
std::vector<std::size_t> zero_offdiag_positions(const SymTridiag& t);

/// Contiguous diagonal block [first, first + count).
SymTridiag sub_tridiag(const SymTridiag& t, std::size_t first, std::size_t count);

/// Pieces between exact zero off-diagonals, each solved by `solve`, then
/// combined into one sorted decomposition.
template <class Solve>
SpectralDecomposition solve_decoupled(const SymTridiag& t, const std::vector<std::size_t>& zeros,
                                      Solve&& solve);

/// Eigenpairs (value, column) merged by value; stable, so earlier entries
/// win ties.
SpectralDecomposition assemble_sorted(std::vector<double> values, Matrix vectors);

/// Runs the callables, concurrently when threads > 1, charging flops to the
/// caller's counter and phase.
template <class... F>
void run_children(unsigned threads, F&&... fns) {
  if (threads <= 1) {
    (fns(), ...);
    return;
  }
  const flops::Context ctx = flops::Context::capture();
  std::vector<std::future<void>> jobs;
  (jobs.push_back(std::async(std::launch::async,
                             [ctx, &fns] {
                               flops::ContextScope scope(ctx);
                               fns();
                             })),
   ...);
  for (auto& j : jobs) j.get();
}

/// Splits a thread budget among k children.
inline unsigned child_threads(unsigned threads, unsigned k) {
  return threads <= 1 ? 1u : std::max(1u, threads / k);
}

template <class Solve>
SpectralDecomposition solve_decoupled(const SymTridiag& t, const std::vector<std::size_t>& zeros,
                                      Solve&& solve) {
  const std::size_t n = t.size();
  std::vector<std::size_t> starts{0};
  for (std::size_t z : zeros) starts.push_back(z + 1);
  starts.push_back(n);
  std::vector<double> values;
  Matrix x(n, n);
  for (std::size_t b = 0; b + 1 < starts.size(); ++b) {
    const std::size_t first = starts[b];
    const std::size_t count = starts[b + 1] - first;
    SpectralDecomposition dec = solve(sub_tridiag(t, first, count));
    for (std::size_t j = 0; j < count; ++j) {
      values.push_back(dec.eigenvalues[j]);
      const std::size_t col = values.size() - 1;
      for (std::size_t i = 0; i < count; ++i) x(first + i, col) = dec.vectors(i, j);
    }
  }
  return assemble_sorted(std::move(values), std::move(x));
}

}  // namespace rtdc::detail
