#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtdc/flops.hpp"
#include "rtdc/matrix.hpp"
#include "rtdc/qr_solver.hpp"
#include "rtdc/tridiag.hpp"

namespace rtdc {

/// Seed used by the measures when the caller does not supply one.
inline constexpr std::uint64_t kDefaultNormSeed = 0x5eed;

/// ‖m‖₂ by power iteration on mᵀm from a seeded random start. Stops once
/// successive estimates agree to 1e-6 relative or after 200 iterations.
double spectral_norm(const Matrix& m, std::uint64_t seed = kDefaultNormSeed);

/// ‖A·Q - Q·Λ‖₂ / (n·eps·‖A‖₂). Throws ArgumentError on mismatched sizes or
/// a decomposition without vectors.
double residual_measure(const DenseSym& a, const SpectralDecomposition& dec,
                        std::uint64_t seed = kDefaultNormSeed);
double residual_measure(const SymTridiag& t, const SpectralDecomposition& dec,
                        std::uint64_t seed = kDefaultNormSeed);

/// ‖I - QᵀQ‖₂ / (n·eps).
double orthogonality_measure(const SpectralDecomposition& dec,
                             std::uint64_t seed = kDefaultNormSeed);

enum class SolverKind { qr, cdc, rtdc, rtdc_naive };

std::string_view solver_name(SolverKind s);
/// Accepts qr, cdc, rtdc and rtdc-naive; nullopt otherwise.
std::optional<SolverKind> parse_solver(std::string_view name);

struct SolveOptions {
  std::size_t base_cutoff = 25;
  unsigned threads = 1;
};

/// Full decomposition of t with the chosen solver. Throws
/// InternalConsistencyError if any computed value is not finite.
SpectralDecomposition solve_with(SolverKind s, const SymTridiag& t, const SolveOptions& opt = {});

struct AccuracyReport {
  std::size_t n = 0;
  std::string solver;
  double residual = 0.0;
  double orthogonality = 0.0;
  /// Work needed for eigenvalues only: subproblem solves, deflation and
  /// secular roots for the divide-and-conquer solvers, a values-only run for
  /// QR.
  std::uint64_t flops_eigenvalues = 0;
  std::uint64_t flops_total = 0;
  /// Zero unless timing was requested.
  double wall_seconds = 0.0;
  /// Solver failure message; the measures are NaN when set.
  std::string error;
};

struct BenchOptions {
  SolveOptions solve;
  std::uint64_t seed = kDefaultNormSeed;
  bool timing = false;
  /// Rows computed concurrently; the report keeps input order.
  unsigned jobs = 1;
};

/// One row per (size, solver), sizes outermost. Each size must be a perfect
/// square m²: the m x m Laplacian is tridiagonalized and the measures are
/// taken against the tridiagonal matrix. Solver errors are recorded in the
/// row and the run continues.
std::vector<AccuracyReport> run_benchmark(const std::vector<std::size_t>& sizes,
                                          const std::vector<SolverKind>& solvers,
                                          const BenchOptions& opt = {});

/// CSV with header n,solver,residual,orthogonality,flops_eigenvalues,
/// flops_total,wall_ms. Failed rows carry NaN measures.
void write_csv(const std::vector<AccuracyReport>& rows, std::ostream& out);
/// Aligned text table with the same columns plus an error column.
void write_table(const std::vector<AccuracyReport>& rows, std::ostream& out);

}  // namespace rtdc
