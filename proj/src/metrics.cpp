#include "rtdc/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "rtdc/errors.hpp"
#include "rtdc/matrix_io.hpp"
#include "rtdc/rank_one.hpp"
#include "rtdc/rank_two.hpp"

namespace rtdc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Ratio with the conventions 0/0 = 0 and x/0 = inf.
double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

void require_vectors(const SpectralDecomposition& dec, const char* who) {
  if (!dec.has_vectors()) throw ArgumentError(std::string(who) + ": decomposition has no vectors");
  if (dec.vectors.rows() != dec.size() || dec.vectors.cols() != dec.size())
    throw ArgumentError(std::string(who) + ": vector matrix does not match the eigenvalue count");
}

}  // namespace

double spectral_norm(const Matrix& m, std::uint64_t seed) {
  const std::size_t rows = m.rows(), cols = m.cols();
  if (rows == 0 || cols == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::vector<double> x(cols), y(rows), z(cols);
  for (double& v : x) v = static_cast<double>(rng() >> 11) * 0x1p-53 - 0.5;
  double nx = norm2(x);
  double estimate = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (double& v : x) v /= nx;
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) y[i] += m(i, j) * x[j];
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) s += m(i, j) * y[i];
      z[j] = s;
    }
    const double next = norm2(y);
    nx = norm2(z);
    x.swap(z);
    if (nx == 0.0) return next;
    const bool done = it > 0 && std::abs(next - estimate) <= 1e-6 * next;
    estimate = next;
    if (done) break;
  }
  return estimate;
}

double residual_measure(const DenseSym& a, const SpectralDecomposition& dec, std::uint64_t seed) {
  require_vectors(dec, "residual_measure");
  const std::size_t n = a.size();
  if (dec.size() != n) throw ArgumentError("residual_measure: order mismatch");
  Matrix r = a.matrix() * dec.vectors;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) r(i, j) -= dec.vectors(i, j) * dec.eigenvalues[j];
  const double na = spectral_norm(a.matrix(), seed);
  return safe_ratio(spectral_norm(r, seed), static_cast<double>(n) * kEps * na);
}

double residual_measure(const SymTridiag& t, const SpectralDecomposition& dec, std::uint64_t seed) {
  return residual_measure(DenseSym(t.to_dense()), dec, seed);
}

double orthogonality_measure(const SpectralDecomposition& dec, std::uint64_t seed) {
  require_vectors(dec, "orthogonality_measure");
  const std::size_t n = dec.size();
  Matrix g = transpose_times(dec.vectors, dec.vectors);
  for (std::size_t i = 0; i < n; ++i) g(i, i) -= 1.0;
  return safe_ratio(spectral_norm(g, seed), static_cast<double>(n) * kEps);
}

std::string_view solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::qr: return "qr";
    case SolverKind::cdc: return "cdc";
    case SolverKind::rtdc: return "rtdc";
    case SolverKind::rtdc_naive: return "rtdc-naive";
  }
  return "?";
}

std::optional<SolverKind> parse_solver(std::string_view name) {
  for (SolverKind s : {SolverKind::qr, SolverKind::cdc, SolverKind::rtdc, SolverKind::rtdc_naive})
    if (solver_name(s) == name) return s;
  return std::nullopt;
}

namespace {

SpectralDecomposition dispatch(SolverKind s, const SymTridiag& t, const SolveOptions& opt) {
  switch (s) {
    case SolverKind::qr: return qr_eigensolve(t, true);
    case SolverKind::cdc: return cdc_solve(t, opt.base_cutoff, opt.threads);
    case SolverKind::rtdc:
    case SolverKind::rtdc_naive:
      return rtdc_solve(t, RtdcOptions{.base_cutoff = opt.base_cutoff,
                                       .stable_vectors = s == SolverKind::rtdc,
                                       .threads = opt.threads});
  }
  throw ArgumentError("solve_with: unknown solver");
}

}  // namespace

SpectralDecomposition solve_with(SolverKind s, const SymTridiag& t, const SolveOptions& opt) {
  SpectralDecomposition dec = dispatch(s, t, opt);
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(dec.eigenvalues.begin(), dec.eigenvalues.end(), finite) ||
      !std::all_of(dec.vectors.data().begin(), dec.vectors.data().end(), finite))
    throw InternalConsistencyError(std::string(solver_name(s)) +
                                   ": result is not finite (entries too large?)");
  return dec;
}

namespace {

AccuracyReport bench_row(const SymTridiag& t, SolverKind s, const BenchOptions& opt) {
  AccuracyReport row;
  row.n = t.size();
  row.solver = std::string(solver_name(s));
  try {
    FlopCounter counter;
    SpectralDecomposition dec;
    const auto start = std::chrono::steady_clock::now();
    {
      flops::CounterScope scope(&counter);
      // Unpinned, so a whole-matrix base case counts as subproblem work
      // while the drivers still set their own phases.
      flops::PhaseScope phase(Phase::subproblems);
      dec = solve_with(s, t, opt.solve);
    }
    const auto stop = std::chrono::steady_clock::now();
    if (opt.timing) row.wall_seconds = std::chrono::duration<double>(stop - start).count();
    row.flops_total = counter.total_flops();
    if (s == SolverKind::qr) {
      FlopCounter values_only;
      flops::CounterScope scope(&values_only);
      flops::PhaseScope phase(Phase::subproblems);
      qr_eigensolve(t, false);
      row.flops_eigenvalues = values_only.total_flops();
    } else {
      row.flops_eigenvalues = counter.eigenvalue_flops();
    }
    row.residual = residual_measure(t, dec, opt.seed);
    row.orthogonality = orthogonality_measure(dec, opt.seed);
  } catch (const Error& e) {
    row.residual = row.orthogonality = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
  }
  return row;
}

std::size_t grid_side(std::size_t n) {
  auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (n == 0 || m * m != n)
    throw ArgumentError("run_benchmark: size " + std::to_string(n) + " is not a positive square");
  return m;
}

}  // namespace

std::vector<AccuracyReport> run_benchmark(const std::vector<std::size_t>& sizes,
                                          const std::vector<SolverKind>& solvers,
                                          const BenchOptions& opt) {
  std::vector<SymTridiag> mats;
  for (std::size_t n : sizes)
    mats.push_back(householder_tridiagonalize(laplacian_2d(grid_side(n))).t);

  const std::size_t total = sizes.size() * solvers.size();
  std::vector<AccuracyReport> rows(total);
  auto work = [&](std::size_t k) {
    rows[k] = bench_row(mats[k / solvers.size()], solvers[k % solvers.size()], opt);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(total)));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < total; ++k) work(k);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < total; k = next++) work(k);
    });
  pool.clear();
  return rows;
}

namespace {

std::string measure_text(double x) {
  if (std::isnan(x)) return "nan";
  return format_double(x);
}

std::string wall_ms_text(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds * 1e3);
  return buf;
}

}  // namespace

void write_csv(const std::vector<AccuracyReport>& rows, std::ostream& out) {
  out << "n,solver,residual,orthogonality,flops_eigenvalues,flops_total,wall_ms\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.solver << ',' << measure_text(r.residual) << ','
        << measure_text(r.orthogonality) << ',' << r.flops_eigenvalues << ',' << r.flops_total
        << ',' << wall_ms_text(r.wall_seconds) << '\n';
}

void write_table(const std::vector<AccuracyReport>& rows, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%6s  %-10s  %12s  %12s  %14s  %14s  %10s  %s\n", "n", "solver",
                "residual", "orthogonality", "flops_eig", "flops_total", "wall_ms", "error");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%6zu  %-10s  %12.4g  %12.4g  %14llu  %14llu  %10.3f  %s\n",
                  r.n, r.solver.c_str(), r.residual, r.orthogonality,
                  static_cast<unsigned long long>(r.flops_eigenvalues),
                  static_cast<unsigned long long>(r.flops_total), r.wall_seconds * 1e3,
                  r.error.c_str());
    out << line;
  }
}

}  // namespace rtdc
