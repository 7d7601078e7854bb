#include "cprox/solver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

namespace cprox {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

SmoothLoss SmoothLoss::square(LinearOperator a, Vec y) {
  if (a.rows() != y.size()) throw DimError("SmoothLoss: A rows != y size");
  LipschitzResult lr = lipschitz_square_loss(a);
  SmoothLoss loss;
  loss.a = std::move(a);
  loss.y = std::move(y);
  loss.L = lr.L;
  loss.frobenius_bound = lr.frobenius_bound;
  return loss;
}

SmoothLoss SmoothLoss::square(LinearOperator a, Vec y, double lipschitz) {
  if (a.rows() != y.size()) throw DimError("SmoothLoss: A rows != y size");
  if (!(lipschitz > 0)) throw InputError("SmoothLoss: L must be positive");
  SmoothLoss loss;
  loss.a = std::move(a);
  loss.y = std::move(y);
  loss.L = lipschitz;
  return loss;
}

SmoothLoss SmoothLoss::square_auto(LinearOperator a, Vec y) {
  if (static_cast<long long>(a.rows()) * a.cols() <= 1000000)
    return square(std::move(a), std::move(y));
  SpectralInterval si = power_iteration_extremes(LinearOperator::gram(a),
                                                 1e-12, 10000, 12345);
  return square(std::move(a), std::move(y), si.lambda_max * (1.0 + 1e-6));
}

double SmoothLoss::value(const Vec& x) const {
  return 0.5 * (a.apply(x) - y).squaredNorm();
}

Vec SmoothLoss::grad(const Vec& x) const { return a.apply_t(a.apply(x) - y); }

Vec grad_square_loss(const SmoothLoss& loss, const Vec& x) {
  return loss.grad(x);
}

double CompositeProblem::objective(const Vec& x) const {
  double pen = reg_weight > 0 ? penalty_value(penalty, b.apply(x)) : 0.0;
  return loss.value(x) + reg_weight * pen;
}

void CompositeProblem::validate() const {
  if (loss.a.cols() != b.cols())
    throw DimError("CompositeProblem: A and B column counts differ");
  if (loss.a.rows() != loss.y.size())
    throw DimError("CompositeProblem: A rows != y size");
  if (!(reg_weight >= 0))
    throw InputError("CompositeProblem: reg_weight must be >= 0");
  if (penalty.kind == PenaltyKind::OINorm)
    throw InputError("CompositeProblem: matrix penalty in a vector problem");
  if (!(loss.L > 0) || !std::isfinite(loss.L))
    throw InputError("CompositeProblem: bad Lipschitz constant");
}

double SolverTrace::total_time_ms() const {
  double s = 0;
  for (double t : time_ms) s += t;
  return s;
}

std::pair<std::vector<double>, std::vector<double>> theta_rho_sequence(int T) {
  if (T < 1) throw InputError("theta_rho_sequence: T must be >= 1");
  std::vector<double> thetas(static_cast<size_t>(T));
  std::vector<double> rhos(static_cast<size_t>(T));
  thetas[0] = 1.0;
  rhos[0] = 1.0;
  for (int t = 1; t < T; ++t) {
    double th = thetas[static_cast<size_t>(t - 1)];
    double next = 0.5 * (-th * th + th * std::sqrt(th * th + 4.0));
    thetas[static_cast<size_t>(t)] = next;
    rhos[static_cast<size_t>(t)] = 1.0 - next + next / th;
  }
  return {std::move(thetas), std::move(rhos)};
}

namespace {

struct SolveSetup {
  ProxPenalty step_penalty;  // penalty with weight scaled by reg_weight / L
  double lam = 1.0;
  double lmax_hint = -1.0;  // spectral norm of B B^T for build_H reuse
  SpdOperator q;
};

SolveSetup prepare(const CompositeProblem& problem, const SolverConfig& config,
                   SolverTrace& trace) {
  if (!(config.kappa > 0.0 && config.kappa < 1.0))
    throw InputError("SolverConfig: kappa must lie in (0,1)");
  if (!(config.inner_tol > 0) || !(config.epsilon > 0))
    throw InputError("SolverConfig: tolerances must be positive");
  if (config.inner_cap < 1 || config.outer_cap < 1 || config.window < 1)
    throw InputError("SolverConfig: caps must be >= 1");
  problem.validate();

  SolveSetup s{problem.penalty, 1.0, -1.0,
               SpdOperator::identity(static_cast<int>(problem.b.cols()))};
  s.step_penalty.weight *= problem.reg_weight / problem.loss.L;

  SpectralInterval si;
  double auto_lam = default_lambda(problem.b, s.q, &si, config.seed);
  trace.mu_max = si.lambda_max;
  trace.mu_min = si.lambda_min;
  trace.spectral_converged = si.converged;
  s.lam = config.lam > 0 ? config.lam : auto_lam;
  s.lmax_hint = si.lambda_max;
  trace.lam_used = s.lam;
  return s;
}

bool hit_target(const SolverConfig& config, double best) {
  return !std::isnan(config.target_objective) &&
         best <= config.target_objective;
}

}  // namespace

std::pair<Vec, SolverTrace> solve_proximal(const CompositeProblem& problem,
                                           const SolverConfig& config) {
  SolverTrace trace;
  SolveSetup s = prepare(problem, config, trace);
  const int d = problem.dim();
  const double inv_l = 1.0 / problem.loss.L;

  Vec x = Vec::Zero(d);
  double f_prev = problem.objective(x);
  Vec best_x = x;
  double best_f = f_prev;
  const bool chasing = !std::isnan(config.target_objective);
  FixedPointState warm;

  for (int t = 0; t < config.outer_cap; ++t) {
    auto t0 = std::chrono::steady_clock::now();
    Vec z = x - inv_l * problem.loss.grad(x);
    CompositeProxResult r = prox_composite(
        s.step_penalty, problem.b, z, s.lam, config.kappa, config.inner_tol,
        config.inner_cap, config.warm_start ? &warm : nullptr, s.lmax_hint);
    if (!r.state.converged) trace.inner_ever_failed = true;
    if (config.warm_start) warm = std::move(r.state);

    double f = problem.objective(r.u);
    trace.objective.push_back(f);
    trace.inner_iters.push_back(config.warm_start
                                    ? warm.iterations_used
                                    : r.state.iterations_used);
    trace.step_norm.push_back((r.u - x).norm());
    trace.time_ms.push_back(elapsed_ms(t0));
    x = std::move(r.u);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    if (chasing) {
      if (hit_target(config, best_f)) {
        trace.converged = true;
        trace.target_reached = true;
        break;
      }
    } else if (std::abs(f - f_prev) <= config.epsilon) {
      trace.converged = true;
      break;
    }
    f_prev = f;
  }
  return {std::move(best_x), std::move(trace)};
}

std::pair<Vec, SolverTrace> solve_accelerated(const CompositeProblem& problem,
                                              const SolverConfig& config) {
  SolverTrace trace;
  SolveSetup s = prepare(problem, config, trace);
  const int d = problem.dim();
  const double inv_l = 1.0 / problem.loss.L;

  Vec x = Vec::Zero(d);
  Vec alpha = x;
  double theta = 1.0;
  Vec best_x = x;
  double best_f = problem.objective(x);
  const bool chasing = !std::isnan(config.target_objective);
  std::vector<double> best_hist;  // best objective after each iteration
  FixedPointState warm;

  for (int t = 0; t < config.outer_cap; ++t) {
    auto t0 = std::chrono::steady_clock::now();
    Vec z = alpha - inv_l * problem.loss.grad(alpha);
    CompositeProxResult r = prox_composite(
        s.step_penalty, problem.b, z, s.lam, config.kappa, config.inner_tol,
        config.inner_cap, config.warm_start ? &warm : nullptr, s.lmax_hint);
    if (!r.state.converged) trace.inner_ever_failed = true;
    Vec x_new = std::move(r.u);
    if (config.warm_start) warm = std::move(r.state);

    double f = problem.objective(x_new);
    trace.objective.push_back(f);
    trace.inner_iters.push_back(config.warm_start
                                    ? warm.iterations_used
                                    : r.state.iterations_used);
    trace.step_norm.push_back((x_new - x).norm());
    trace.time_ms.push_back(elapsed_ms(t0));
    if (f < best_f) {
      best_f = f;
      best_x = x_new;
    }
    best_hist.push_back(best_f);

    if (chasing) {
      if (hit_target(config, best_f)) {
        trace.converged = true;
        trace.target_reached = true;
        x = std::move(x_new);
        break;
      }
    } else {
      size_t n = best_hist.size();
      if (static_cast<int>(n) > config.window &&
          best_hist[n - 1 - static_cast<size_t>(config.window)] - best_f <=
              config.epsilon) {
        trace.converged = true;
        x = std::move(x_new);
        break;
      }
    }

    double theta_next =
        0.5 * (-theta * theta + theta * std::sqrt(theta * theta + 4.0));
    double rho_next = 1.0 - theta_next + theta_next / theta;
    alpha = rho_next * x_new - (rho_next - 1.0) * x;
    x = std::move(x_new);
    theta = theta_next;
  }
  return {std::move(best_x), std::move(trace)};
}

std::pair<Vec, SolverTrace> solve(const CompositeProblem& problem,
                                  const SolverConfig& config) {
  return config.accelerated ? solve_accelerated(problem, config)
                            : solve_proximal(problem, config);
}

void write_trace_csv(const std::string& path, const SolverTrace& trace,
                     bool zero_time) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  f << "iter,objective,inner_iters,step_norm,time_ms\n";
  for (size_t i = 0; i < trace.objective.size(); ++i) {
    f << (i + 1) << ',' << format_double(trace.objective[i]) << ','
      << trace.inner_iters[i] << ',' << format_double(trace.step_norm[i])
      << ',' << format_double(zero_time ? 0.0 : trace.time_ms[i]) << "\n";
  }
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace cprox
