#pragma once

#include "cprox/linalg.hpp"
#include "cprox/prox.hpp"

#include <functional>

// Reference implementations used only by the test suites. Everything here is
// written against the mathematical definitions, not against the library code
// under test: penalty values are recomputed from scratch, the prox oracle is
// a brute-force search, and the composite reference solves the dual by
// projected gradients with its own projections.
namespace oracle {

using cprox::LinearOperator;
using cprox::Mat;
using cprox::ProxPenalty;
using cprox::Vec;

// omega(z) recomputed from the penalty definition.
double penalty_value(const ProxPenalty& pen, const Vec& z);

// argmin_y 0.5*||y - x||^2 + scale*omega(y) by multistart compass search
// over the full {-1,0,1}^k stencil. Reliable to ~1e-6 in argument for
// dimensions up to ~6; cost grows as 3^k, keep k small.
Vec grid_prox(const ProxPenalty& pen, const Vec& x, double scale);

// Same search over matrix entries for spectral penalties; omega(Y) is the
// inner penalty applied to the singular values of Y (Jacobi SVD, not the
// library's). weight multiplies the whole penalty.
Mat grid_prox_matrix(const ProxPenalty& inner, double weight, const Mat& x);

// prox of lam*||.||_inf by the sorted top-k formula: with s the magnitudes
// sorted descending and k* the largest k such that sum_{j<=k}(s_j - s_k) <
// lam, the active entries are clamped to tau = (sum_{j<=k*} s_j - lam)/k*.
Vec linf_prox_formula(const Vec& x, double lam);

// Euclidean projection onto the l1 ball, sort-based.
Vec l1_ball_projection(const Vec& x, double radius);

// prox_{omega o B}(x) by accelerated projected gradient on the dual
//   min_{u in C} 0.5*||x - B^T u||^2,   C = {u : omega*(u) <= weight-ball}
// for the penalties whose dual ball has an exact projection:
// L1 -> box, L2 -> ball, LInf -> l1 ball, GroupL2 -> per-block balls.
// Other kinds are rejected.
Vec dual_prox(const ProxPenalty& pen, const LinearOperator& b, const Vec& x,
              int iters = 20000);

// Central finite differences.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                double h = 1e-6);

}  // namespace oracle
