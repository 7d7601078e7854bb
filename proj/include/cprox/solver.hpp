#pragma once

#include "cprox/fixed_point.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cprox {

// Smooth part f(x) = 0.5*||Ax - y||^2 with gradient A^T(Ax - y). The stored
// Lipschitz constant is sigma_max(A)^2 or an upper bound, never less.
struct SmoothLoss {
  LinearOperator a;
  Vec y;
  double L = 1.0;
  bool frobenius_bound = false;  // true when L fell back to ||A||_F^2

  static SmoothLoss square(LinearOperator a, Vec y);
  static SmoothLoss square(LinearOperator a, Vec y, double lipschitz);
  // Exact constant when A is small enough to densify for SVD; otherwise a
  // power-iteration estimate inflated by 1e-6 so it stays an upper bound.
  static SmoothLoss square_auto(LinearOperator a, Vec y);

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
};

Vec grad_square_loss(const SmoothLoss& loss, const Vec& x);

// min_x f(x) + reg_weight * omega(Bx)
struct CompositeProblem {
  SmoothLoss loss;
  ProxPenalty penalty;
  LinearOperator b;
  double reg_weight = 1.0;

  int dim() const { return static_cast<int>(loss.a.cols()); }
  double objective(const Vec& x) const;
  void validate() const;
};

struct SolverConfig {
  double kappa = 0.2;     // Opial averaging weight for the inner loop
  double lam = -1.0;      // <= 0: auto via 2/(mu_max + mu_min) of B B^T
  double inner_tol = 1e-10;
  int inner_cap = 1000;
  double epsilon = 1e-8;  // outer stop on objective improvement
  int outer_cap = 20000;
  bool warm_start = true;
  bool accelerated = true;
  int window = 10;        // sliding window for the accelerated stop
  // When finite, the run is a pure chase: it stops once the best objective
  // falls to this value or below (or at the cap), and the epsilon/window
  // rules are not consulted. Used to race a baseline against a reference.
  double target_objective = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;  // start vector of the spectral estimation
};

struct SolverTrace {
  std::vector<double> objective;  // F(x_t) per outer iteration
  std::vector<int> inner_iters;
  std::vector<double> step_norm;  // ||x_t - x_{t-1}||
  std::vector<double> time_ms;    // per-iteration wall clock

  double lam_used = 0.0;
  double mu_max = 0.0;  // spectral extremes of B B^T (cached once)
  double mu_min = 0.0;
  bool spectral_converged = true;
  bool converged = false;       // a stopping rule fired before the cap
  bool target_reached = false;  // target_objective stop specifically
  bool inner_ever_failed = false;

  int outer_iters() const { return static_cast<int>(objective.size()); }
  double total_time_ms() const;
};

// thetas[t] = theta_{t+1} with theta_1 = 1 and
// theta_{t+1} = (-theta_t^2 + theta_t*sqrt(theta_t^2+4))/2.
// rhos[t] = rho_{t+1} = 1 - theta_{t+1} + theta_{t+1}/theta_t (rhos[0] = 1,
// never used as momentum).
std::pair<std::vector<double>, std::vector<double>> theta_rho_sequence(int T);

std::pair<Vec, SolverTrace> solve_proximal(const CompositeProblem& problem,
                                           const SolverConfig& config);
std::pair<Vec, SolverTrace> solve_accelerated(const CompositeProblem& problem,
                                              const SolverConfig& config);
// Dispatches on config.accelerated.
std::pair<Vec, SolverTrace> solve(const CompositeProblem& problem,
                                  const SolverConfig& config);

// CSV with header iter,objective,inner_iters,step_norm,time_ms. zero_time
// writes 0 in the time column so repeated runs are byte-identical.
void write_trace_csv(const std::string& path, const SolverTrace& trace,
                     bool zero_time = false);

}  // namespace cprox
