#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rtdc/errors.hpp"
#include "rtdc/metrics.hpp"

using namespace rtdc;

TEST_SUITE("metrics") {
  TEST_CASE("spectral norm") {
    Matrix m(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = -5.0;
    CHECK(spectral_norm(m) == doctest::Approx(5.0).epsilon(1e-6));

    oracle::Rng rng(41);
    Matrix r(12, 12);
    for (std::size_t j = 0; j < 12; ++j)
      for (std::size_t i = 0; i <= j; ++i) r(i, j) = r(j, i) = rng.uniform(-1.0, 1.0);
    CHECK(spectral_norm(r) == doctest::Approx(oracle::sym_norm2(r)).epsilon(1e-5));
    CHECK(spectral_norm(Matrix(3, 3)) == 0.0);
  }

  TEST_CASE("exact decompositions measure zero") {
    Matrix a(3, 3);
    a(0, 0) = 1;
    a(1, 1) = 2;
    a(2, 2) = 3;
    const SpectralDecomposition dec{{1, 2, 3}, Matrix::identity(3)};
    CHECK(residual_measure(DenseSym(a), dec) == 0.0);
    CHECK(orthogonality_measure(dec) == 0.0);
  }

  TEST_CASE("a perturbed entry raises the residual") {
    std::vector<double> d(10);
    for (std::size_t i = 0; i < 10; ++i) d[i] = static_cast<double>(i + 1);
    const SymTridiag t(d, std::vector<double>(9, 0.0));
    SpectralDecomposition dec{d, Matrix::identity(10)};
    CHECK(residual_measure(t, dec) == 0.0);
    dec.vectors(3, 0) += 1e-12;
    // The perturbed column picks up (d₃ - d₀)·1e-12 in row 3.
    const double expected = 3e-12 / (10 * oracle::kEps * 10.0);
    CHECK(residual_measure(t, dec) == doctest::Approx(expected).epsilon(1e-4));
  }

  TEST_CASE("a duplicated column is caught") {
    Matrix q = Matrix::identity(10);
    for (std::size_t i = 0; i < 10; ++i) q(i, 1) = q(i, 0);
    const SpectralDecomposition dec{std::vector<double>(10, 1.0), q};
    // I - QᵀQ has the 2x2 block [[0,-1],[-1,0]], norm 1.
    const double expected = 1.0 / (10 * oracle::kEps);
    CHECK(orthogonality_measure(dec) == doctest::Approx(expected).epsilon(1e-5));
    CHECK(orthogonality_measure(dec) > 1e14);
  }

  TEST_CASE("sign flips do not change the measures") {
    const SymTridiag t = random_tridiag(30, 2);
    SpectralDecomposition dec = qr_eigensolve(t);
    const double r = residual_measure(t, dec), o = orthogonality_measure(dec);
    for (std::size_t i = 0; i < 30; ++i) dec.vectors(i, 4) = -dec.vectors(i, 4);
    CHECK(residual_measure(t, dec) == doctest::Approx(r).epsilon(1e-5));
    CHECK(orthogonality_measure(dec) == doctest::Approx(o).epsilon(1e-5));
  }

  TEST_CASE("size checks") {
    const SymTridiag t = random_tridiag(4, 1);
    CHECK_THROWS_AS(residual_measure(t, qr_eigensolve(random_tridiag(5, 1))), ArgumentError);
    CHECK_THROWS_AS(residual_measure(t, qr_eigensolve(t, false)), ArgumentError);
  }

  TEST_CASE("solver names round trip") {
    for (SolverKind s : {SolverKind::qr, SolverKind::cdc, SolverKind::rtdc, SolverKind::rtdc_naive})
      CHECK(parse_solver(solver_name(s)) == s);
    CHECK(solver_name(SolverKind::rtdc_naive) == "rtdc-naive");
    CHECK_FALSE(parse_solver("lapack").has_value());
  }

  TEST_CASE("solve_with agrees across solvers") {
    const SymTridiag t = random_tridiag(60, 12);
    const auto ref = solve_with(SolverKind::qr, t);
    for (SolverKind s : {SolverKind::cdc, SolverKind::rtdc}) {
      const auto dec = solve_with(s, t, SolveOptions{8, 1});
      CHECK(oracle::max_sorted_gap(dec.eigenvalues, ref.eigenvalues) <= 60 * oracle::kEps * t.norm_inf());
    }
  }
}

TEST_SUITE("benchmark") {
  TEST_CASE("empty sizes give an empty report") {
    CHECK(run_benchmark({}, {SolverKind::qr}).empty());
  }

  TEST_CASE("rows, order and accuracy") {
    const std::vector<SolverKind> solvers{SolverKind::qr, SolverKind::cdc, SolverKind::rtdc};
    const auto rows = run_benchmark({9, 25}, solvers);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].n == 9);
    CHECK(rows[0].solver == "qr");
    CHECK(rows[5].n == 25);
    CHECK(rows[5].solver == "rtdc");
    for (const auto& r : rows) {
      CHECK(r.error.empty());
      CHECK(r.residual <= 5.0);
      CHECK(r.orthogonality <= 5.0);
      CHECK(r.flops_eigenvalues > 0);
      CHECK(r.flops_eigenvalues <= r.flops_total);
      CHECK(r.wall_seconds == 0.0);
    }
  }

  TEST_CASE("deterministic and independent of jobs") {
    const std::vector<SolverKind> solvers{SolverKind::cdc, SolverKind::rtdc};
    BenchOptions serial;
    serial.solve.base_cutoff = 4;
    BenchOptions parallel = serial;
    parallel.jobs = 3;
    std::ostringstream a, b;
    write_csv(run_benchmark({9, 16, 25}, solvers, serial), a);
    write_csv(run_benchmark({9, 16, 25}, solvers, parallel), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("n,solver,residual,orthogonality,flops_eigenvalues,flops_total,wall_ms\n", 0) == 0);
  }

  TEST_CASE("sizes must be perfect squares") {
    CHECK_THROWS_AS(run_benchmark({10}, {SolverKind::qr}), ArgumentError);
  }

  TEST_CASE("table output lists each row") {
    std::ostringstream out;
    write_table(run_benchmark({4}, {SolverKind::qr, SolverKind::rtdc}), out);
    const std::string s = out.str();
    CHECK(s.find("qr") != std::string::npos);
    CHECK(s.find("rtdc") != std::string::npos);
  }
}
