#include "cprox/experiments.hpp"
#include "cprox/manifest.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };
LogLevel g_log = LogLevel::Info;

bool init_log_level() {
  const char* env = std::getenv("COMPOSITE_PROX_LOG");
  if (!env) return true;
  std::string v(env);
  if (v == "quiet") g_log = LogLevel::Quiet;
  else if (v == "info") g_log = LogLevel::Info;
  else if (v == "debug") g_log = LogLevel::Debug;
  else {
    std::cerr << "COMPOSITE_PROX_LOG must be one of quiet|info|debug (got '"
              << v << "')\n";
    return false;
  }
  return true;
}

void log_info(const std::string& msg) {
  if (g_log >= LogLevel::Info) std::cerr << msg << "\n";
}
void log_debug(const std::string& msg) {
  if (g_log >= LogLevel::Debug) std::cerr << msg << "\n";
}

struct SolveArgs {
  std::string manifest;
  std::string out;
};

struct BenchArgs {
  std::string suite;
  std::vector<int> sizes;
  int repeats = 10;
  std::string out = "bench_out";
  std::uint64_t seed = 0;
  int jobs = 1;
  bool paper_scale = false;
  bool deterministic_timing = false;
};

int run_solve(const SolveArgs& args) {
  cprox::RunManifest m = cprox::read_manifest(args.manifest);
  cprox::CompositeProblem problem = cprox::manifest_problem(m);
  cprox::SolverConfig config = cprox::manifest_config(m);
  log_debug("solve: d=" + std::to_string(problem.dim()) +
            (config.accelerated ? ", accelerated" : ", baseline"));

  auto [x, trace] = cprox::solve(problem, config);

  std::string sol = m.solution_path, tr = m.trace_path;
  if (!args.out.empty()) {
    std::filesystem::create_directories(args.out);
    sol = (std::filesystem::path(args.out) / "solution.txt").string();
    tr = (std::filesystem::path(args.out) / "trace.csv").string();
  }
  cprox::write_vector(sol, x);
  cprox::write_trace_csv(tr, trace);
  log_info("solve: " + std::to_string(trace.outer_iters()) +
           " outer iterations, objective " +
           cprox::format_double(problem.objective(x)) +
           (trace.converged ? "" : " (iteration cap reached)"));
  return trace.converged ? 0 : 2;
}

int run_prox(const SolveArgs& args) {
  cprox::RunManifest m = cprox::read_manifest(args.manifest);
  cprox::ProxJob job = cprox::manifest_prox(m);
  cprox::SolverConfig config = cprox::manifest_config(m);

  cprox::SpdOperator q =
      cprox::SpdOperator::identity(static_cast<int>(job.b.cols()));
  double lam = job.lam;
  if (lam <= 0) lam = cprox::default_lambda(job.b, q, nullptr, config.seed);
  log_debug("prox: lam=" + cprox::format_double(lam));

  cprox::CompositeProxResult r =
      cprox::prox_composite(job.penalty, job.b, job.x, lam, config.kappa,
                            config.inner_tol, config.inner_cap);

  std::string sol = m.solution_path;
  if (!args.out.empty()) {
    std::filesystem::create_directories(args.out);
    sol = (std::filesystem::path(args.out) / "solution.txt").string();
  }
  cprox::write_vector(sol, r.u);
  std::cout << "inner_iterations " << r.state.iterations_used << "\n"
            << "final_step_norm "
            << cprox::format_double(r.state.final_step_norm) << "\n";
  return r.state.converged ? 0 : 2;
}

int run_bench(const BenchArgs& args) {
  cprox::BenchmarkOptions opt;
  opt.sizes = args.sizes;
  opt.repeats = args.repeats;
  opt.seed = args.seed;
  opt.jobs = args.jobs;
  opt.paper_scale = args.paper_scale;
  opt.deterministic_timing = args.deterministic_timing;
  opt.out_dir = args.out;

  cprox::BenchmarkResult res = cprox::run_benchmark(args.suite, opt);
  for (const auto& rec : res.runs) {
    if (!rec.ok)
      log_info("bench: d=" + std::to_string(rec.d) + " repeat " +
               std::to_string(rec.repeat) + " FAILED: " + rec.error);
    else
      log_debug("bench: d=" + std::to_string(rec.d) + " repeat " +
                std::to_string(rec.repeat) + " accel_outer=" +
                std::to_string(rec.accel_outer) + " baseline_outer=" +
                std::to_string(rec.baseline_outer));
  }
  log_info("bench: summary written to " + res.summary_path);
  return res.all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  if (!init_log_level()) return 1;

  CLI::App app{
      "composite_prox — proximal solvers for f(x) + w(Bx) with "
      "fixed-point evaluation of the composite proximity operator"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "Solve a problem described by a manifest");
  solve_cmd->add_option("--manifest", solve_args.manifest,
                        "Path to a JSON run manifest")->required();
  solve_cmd->add_option("--out", solve_args.out,
                        "Directory for solution.txt and trace.csv "
                        "(overrides the manifest's output paths)");

  SolveArgs prox_args;
  CLI::App* prox_cmd = app.add_subcommand(
      "prox", "Evaluate the composite proximity operator once");
  prox_cmd->add_option("--manifest", prox_args.manifest,
                       "Manifest with problem.b, problem.penalty and a prox "
                       "section")->required();
  prox_cmd->add_option("--out", prox_args.out,
                       "Directory for solution.txt (overrides the manifest)");

  BenchArgs bench_args;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Run a synthetic benchmark suite");
  bench_cmd->add_option("suite", bench_args.suite,
                        "One of: overlap, tree, graph, fused")->required();
  bench_cmd->add_option("--sizes", bench_args.sizes,
                        "Problem dimensions (default: per-suite list; the "
                        "tree suite's size is fixed by its branching)")
      ->delimiter(',');
  bench_cmd->add_option("--repeats", bench_args.repeats,
                        "Random instances per size (default 10)");
  bench_cmd->add_option("--out", bench_args.out,
                        "Output directory (default bench_out)");
  bench_cmd->add_option("--seed", bench_args.seed,
                        "Master seed; per-run streams derive from it");
  bench_cmd->add_option("--jobs", bench_args.jobs,
                        "Parallel runs (results are schedule-independent)");
  bench_cmd->add_flag("--paper-scale", bench_args.paper_scale,
                      "Use the large dimension lists");
  bench_cmd->add_flag("--deterministic-timing", bench_args.deterministic_timing,
                      "Write zeros in all time columns (byte-stable output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_args);
    if (prox_cmd->parsed()) return run_prox(prox_args);
    return run_bench(bench_args);
  } catch (const cprox::AdmissibilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {  // InputError, DimError
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
