#pragma once

#include "cprox/linalg.hpp"

#include <memory>
#include <vector>

namespace cprox {

enum class PenaltyKind { L1, L2, LpPower, LpNorm, LInf, GroupL2, OINorm };

// A simple convex penalty with an exact prox. `weight` scales the whole
// function multiplicatively; LpPower carries its own lambda (the coefficient
// of sum |t|^p) and LpNorm its gamma (the coefficient of ||.||_p), both on
// top of `weight`.
struct ProxPenalty {
  PenaltyKind kind = PenaltyKind::L1;
  double weight = 1.0;
  double p = 2.0;
  double coeff = 1.0;                   // lambda of LpPower / gamma of LpNorm
  std::vector<int> offsets;             // GroupL2 block boundaries, 0..m
  std::shared_ptr<ProxPenalty> inner;   // OINorm

  static ProxPenalty l1(double weight = 1.0);
  static ProxPenalty l2(double weight = 1.0);
  static ProxPenalty lp_power(double p, double lambda, double weight = 1.0);
  static ProxPenalty lp_norm(double p, double gamma, double weight = 1.0);
  static ProxPenalty linf(double weight = 1.0);
  static ProxPenalty group_l2(std::vector<int> offsets, double weight = 1.0);
  static ProxPenalty oi_norm(ProxPenalty inner);
};

Vec prox_l1(const Vec& x, double lam);
Vec prox_l2(const Vec& x, double lam);
Vec prox_lp_power(const Vec& x, double lam, double p);
Vec prox_lp_norm(const Vec& x, double gamma, double p);
Vec prox_linf(const Vec& x, double lam);
Vec prox_group_l2(const Vec& x, double lam, const std::vector<int>& offsets);
Mat prox_oi_norm(const Mat& x, const ProxPenalty& inner);

// Euclidean projection onto {z : ||z||_1 <= radius}; stable sort, ties by
// original index.
Vec project_l1_ball(const Vec& x, double radius);

// omega(z) with the penalty's full scaling applied.
double penalty_value(const ProxPenalty& penalty, const Vec& z);

// prox_{scale * omega}(z). scale > 0; scale folding keeps one entry point for
// the omega/lambda rescaling used by the fixed-point map.
Vec prox_penalty(const ProxPenalty& penalty, const Vec& z, double scale);

struct SubgradResidual {
  double value = 0.0;  // distance from (x - y) to the subdifferential at y
};

// Distance from x - y to the subdifferential of omega at y, computed in
// closed form per penalty. Zero certifies y = prox_omega(x).
SubgradResidual subgrad_residual(const ProxPenalty& penalty, const Vec& x,
                                 const Vec& y);

// Projection of s onto the subdifferential of omega at y; distance returned
// through *dist when non-null. Matrix penalties are rejected (typed error).
Vec project_subdifferential(const ProxPenalty& penalty, const Vec& y,
                            const Vec& s, double* dist = nullptr);

}  // namespace cprox
