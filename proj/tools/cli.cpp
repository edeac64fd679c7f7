#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "rtdc/errors.hpp"
#include "rtdc/matrix_io.hpp"
#include "rtdc/metrics.hpp"
#include "rtdc/rank_two.hpp"

namespace rtdc::cli {

namespace {

constexpr double kPassThreshold = 5.0;

/// Matrix as the solvers see it, plus the reduction basis for dense input.
struct Loaded {
  SymTridiag t;
  std::optional<Matrix> q;
};

Loaded load(const std::string& path) {
  MatrixFile m = read_matrix(path);
  if (auto* t = std::get_if<SymTridiag>(&m)) return {std::move(*t), std::nullopt};
  Tridiagonalization r = householder_tridiagonalize(std::get<DenseSym>(m));
  return {std::move(r.t), std::move(r.q)};
}

struct SolverFlags {
  std::string solver = "rtdc";
  bool naive = false;
  std::size_t cutoff = 25;
  unsigned threads = 1;

  void attach(CLI::App& app) {
    app.add_option("--solver", solver, "qr, cdc, rtdc or rtdc-naive")
        ->check(CLI::IsMember({"qr", "cdc", "rtdc", "rtdc-naive"}))
        ->capture_default_str();
    app.add_flag("--naive-vectors", naive, "rtdc with vectors from the 2x2 system");
    app.add_option("--base-cutoff", cutoff, "largest block handed to QR")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--threads", threads, "threads for independent subproblems")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  SolverKind kind() const {
    SolverKind k = *parse_solver(solver);
    if (naive && k == SolverKind::rtdc) k = SolverKind::rtdc_naive;
    return k;
  }
  SolveOptions options() const { return {.base_cutoff = cutoff, .threads = threads}; }
};

void write_vectors(const Matrix& v, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << "# column j is the eigenvector of eigenvalue j\n";
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) f << (j ? " " : "") << format_double(v(i, j));
    f << '\n';
  }
  if (!f) throw IoError("write to '" + path + "' failed");
}

int cmd_gen(const std::string& kind, std::size_t size, std::uint64_t seed, const std::string& out_path,
            std::ostream& out) {
  MatrixFile m;
  if (kind == "laplacian")
    m = laplacian_2d(size);
  else if (kind == "random-tridiag")
    m = random_tridiag(size, seed);
  else
    m = glued_wilkinson(size, seed);
  if (out_path.empty())
    format_matrix(m, out);
  else
    write_matrix(m, out_path);
  return kOk;
}

int cmd_solve(const std::string& in, const SolverFlags& sf, const std::string& vec_path,
              std::ostream& out) {
  const Loaded a = load(in);
  SpectralDecomposition dec = solve_with(sf.kind(), a.t, sf.options());
  for (double x : dec.eigenvalues) out << format_double(x) << '\n';
  if (!vec_path.empty()) write_vectors(a.q ? *a.q * dec.vectors : dec.vectors, vec_path);
  return kOk;
}

int cmd_verify(const std::string& in, const SolverFlags& sf, std::ostream& out) {
  const Loaded a = load(in);
  const SpectralDecomposition dec = solve_with(sf.kind(), a.t, sf.options());
  const double r = residual_measure(a.t, dec);
  const double o = orthogonality_measure(dec);
  const bool pass = r <= kPassThreshold && o <= kPassThreshold;
  out << "solver " << solver_name(sf.kind()) << '\n'
      << "n " << a.t.size() << '\n'
      << "residual " << format_double(r) << '\n'
      << "orthogonality " << format_double(o) << '\n'
      << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kOk : kVerifyFailed;
}

int cmd_bench(const std::vector<std::size_t>& sizes, const std::vector<std::string>& names,
              const BenchOptions& opt, const std::string& format, std::ostream& out,
              std::ostream& err) {
  std::vector<SolverKind> solvers;
  for (const auto& s : names) {
    auto k = parse_solver(s);
    if (!k) {
      err << "bench: unknown solver '" << s << "'\n";
      return kUsage;
    }
    solvers.push_back(*k);
  }
  const auto rows = run_benchmark(sizes, solvers, opt);
  if (format == "csv")
    write_csv(rows, out);
  else
    write_table(rows, out);
  return kOk;
}

// Samples f on every interval of the top-level merged problem after
// deflation, followed by one row per computed root.
int cmd_plotdata(const std::string& in, std::size_t samples, std::size_t cutoff, std::ostream& out,
                 std::ostream& err) {
  const Loaded a = load(in);
  const std::size_t n = a.t.size();
  if (n > 500) throw ArgumentError("plotdata: order " + std::to_string(n) + " exceeds 500");
  out << "interval_index,lambda,f,fprime,kind\n";
  if (n < 3) {
    err << "plotdata: order below 3 has no rank-two merge\n";
    return kOk;
  }
  const auto [k1, k2] = default_three_way_cut(n);
  const ThreeWaySplit split = split_three(a.t, k1, k2);
  const RtdcOptions opt{.base_cutoff = cutoff};
  const RankTwoProblem p = form_rank_two(split, rtdc_solve(split.t1, opt),
                                         rtdc_solve(split.t2, opt), rtdc_solve(split.t3, opt));
  const RankTwoProblem r = deflate_rank_two(p).reduced;
  if (r.size() == 0) return kOk;

  const IntervalClassification cls = classify_intervals(r);
  const auto& u = cls.values;
  auto emit = [&](std::size_t interval, double lambda, const char* kind) {
    try {
      const SecularEvaluation e = secular_eval(r, lambda);
      out << interval << ',' << format_double(lambda) << ',' << format_double(e.value) << ','
          << format_double(e.derivative) << ',' << kind << '\n';
    } catch (const PoleError&) {
      // Too close to a pole to evaluate; such points are left out.
    }
  };
  for (std::size_t j = 0; j < cls.interval_count(); ++j) {
    const double lo = j == 0 ? cls.lower_bound : u[j - 1];
    const double hi = j == u.size() ? cls.upper_bound : u[j];
    for (std::size_t k = 1; k <= samples; ++k)
      emit(j, lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples + 1), "sample");
  }
  const RankTwoRoots roots = rank_two_roots(r, cls);
  for (std::size_t j = 0; j < roots.size(); ++j) {
    const double pole = r.d[roots.origin[j]];
    const auto at = static_cast<std::size_t>(std::lower_bound(u.begin(), u.end(), pole) - u.begin());
    emit(at + (roots.tau[j] > 0.0 ? 1 : 0), roots.lambda[j], "root");
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symmetric tridiagonal eigensolvers: rank-two divide and conquer with baselines",
               "rtdc"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a test matrix");
  std::string gen_kind, gen_out;
  std::size_t gen_size = 0;
  std::uint64_t seed = 1;
  gen->add_option("kind", gen_kind, "laplacian (size = grid side), random-tridiag or glued")
      ->required()
      ->check(CLI::IsMember({"laplacian", "random-tridiag", "glued"}));
  gen->add_option("size", gen_size, "order, or grid side for laplacian")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "random stream seed")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "output file (default: stdout)");

  std::string in_path, vec_path;
  SolverFlags solve_flags, verify_flags;
  auto* solve = app.add_subcommand("solve", "print eigenvalues, ascending");
  solve->add_option("matrix", in_path, "matrix file")->required();
  solve_flags.attach(*solve);
  solve->add_option("--vectors", vec_path, "also write eigenvectors to this file");

  auto* verify = app.add_subcommand("verify", "residual and orthogonality with PASS/FAIL");
  verify->add_option("matrix", in_path, "matrix file")->required();
  verify_flags.attach(*verify);

  auto* bench = app.add_subcommand("bench", "accuracy and flop table on Laplacian matrices");
  std::vector<std::size_t> sizes{9, 25, 100};
  std::vector<std::string> solvers{"qr", "cdc", "rtdc"};
  std::string format = "table";
  BenchOptions bopt;
  bench->add_option("--sizes", sizes, "orders (perfect squares), comma separated")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--solvers", solvers, "solver names, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--seed", bopt.seed, "seed for the norm estimates")->capture_default_str();
  bench->add_option("--format", format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  bench->add_option("--base-cutoff", bopt.solve.base_cutoff, "largest block handed to QR")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--threads", bopt.solve.threads, "threads inside each solver")
      ->check(CLI::PositiveNumber);
  bench->add_option("--jobs", bopt.jobs, "benchmark rows run at once")->check(CLI::PositiveNumber);
  bench->add_flag("--timing", bopt.timing, "fill the wall_ms column");

  auto* plot = app.add_subcommand("plotdata", "samples of the top-level secular function");
  std::size_t plot_samples = 50, plot_cutoff = 25;
  plot->add_option("matrix", in_path, "matrix file")->required();
  plot->add_option("--samples", plot_samples, "points per interval")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  plot->add_option("--base-cutoff", plot_cutoff, "largest block handed to QR")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_kind, gen_size, seed, gen_out, out);
    if (solve->parsed()) return cmd_solve(in_path, solve_flags, vec_path, out);
    if (verify->parsed()) return cmd_verify(in_path, verify_flags, out);
    if (bench->parsed()) return cmd_bench(sizes, solvers, bopt, format, out, err);
    if (plot->parsed()) return cmd_plotdata(in_path, plot_samples, plot_cutoff, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    err << "error: " << in_path << ": " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "error: " << in_path << ": " << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolver;
  }
  return kUsage;
}

}  // namespace rtdc::cli
