#pragma once

#include "cprox/linalg.hpp"
#include "cprox/prox.hpp"

#include <functional>
#include <limits>
#include <optional>

namespace cprox {

struct AdmissibilityError : std::invalid_argument {
  double lambda_max;  // spectral norm of B Q^{-1} B^T at the failed call
  AdmissibilityError(const std::string& msg, double lmax)
      : std::invalid_argument(msg), lambda_max(lmax) {}
};

// Symmetric positive definite Q with forward apply and a solve.
class SpdOperator {
 public:
  static SpdOperator identity(int n);
  static SpdOperator scaled_identity(int n, double c);
  static SpdOperator dense(Mat q);  // Cholesky held for solves

  int size() const { return n_; }
  bool is_scaled_identity() const { return dense_.size() == 0; }
  double scale() const { return c_; }
  Vec apply(const Vec& x) const;
  Vec solve(const Vec& x) const;

 private:
  int n_ = 0;
  double c_ = 1.0;  // scaled-identity factor
  Mat dense_;
  Eigen::LLT<Mat> llt_;
};

struct FixedPointState {
  Vec v;
  int iterations_used = 0;
  double final_step_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// The affine-then-residual map  v -> (I - prox_{omega/lam})(A v)  with
// A v = (I - lam*B Q^{-1} B^T) v + B Q^{-1} x.
struct HMap {
  const ProxPenalty* penalty;
  const LinearOperator* b;
  const SpdOperator* q;
  Vec bqix;  // B Q^{-1} x, fixed within one build
  double lam;
  Vec operator()(const Vec& v) const;
};

// lambda_max_hint, when >= 0, skips the spectral estimation (callers that
// solve many instances with the same B pass the cached value). The returned
// map keeps pointers into penalty, b and q: they must outlive it.
HMap build_H(const ProxPenalty& penalty, const LinearOperator& b,
             const SpdOperator& q, const Vec& x, double lam,
             double lambda_max_hint = -1.0);

double gram_lambda_max(const LinearOperator& b, const SpdOperator& q,
                       std::uint64_t seed = 0);

// Step size 2/(mu_max + mu_min) from the extreme eigenvalues of B Q^{-1} B^T;
// equals the nonexpansive boundary 2/mu_max when mu_min = 0. seed feeds the
// power iteration's random start.
double default_lambda(const LinearOperator& b, const SpdOperator& q,
                      SpectralInterval* interval = nullptr,
                      std::uint64_t seed = 0);

FixedPointState picard_opial(const std::function<Vec(const Vec&)>& map,
                             Vec v0, double kappa, double tol, int max_iter);

struct CompositeProxResult {
  Vec u;
  FixedPointState state;
};

// prox_{omega o B}(x) = x - lam * B^T v at the fixed point of H (Q = I).
CompositeProxResult prox_composite(const ProxPenalty& penalty,
                                   const LinearOperator& b, const Vec& x,
                                   double lam, double kappa, double tol,
                                   int max_iter,
                                   const FixedPointState* warm = nullptr,
                                   double lambda_max_hint = -1.0);

// Minimizer of 0.5*y^T Q y - x^T y + omega(B y) via u = Q^{-1}(x - lam B^T v).
Vec quad_min_composite(const ProxPenalty& penalty, const LinearOperator& b,
                       const SpdOperator& q, const Vec& x, double lam,
                       double kappa, double tol, int max_iter);

// Optimality residual for u as a candidate prox_{omega o B}(x): distance
// from x - u to B^T * (projection of s onto the subdifferential of omega at
// B u), where s is the dual certificate lam * v.
double composite_optimality_residual(const ProxPenalty& penalty,
                                     const LinearOperator& b, const Vec& x,
                                     const Vec& u, const Vec& s);

}  // namespace cprox
