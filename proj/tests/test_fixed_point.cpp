#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cprox/builders.hpp"
#include "cprox/fixed_point.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace cprox;

namespace {

Vec random_vec(Rng& rng, int n, double scale = 2.0) {
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(-scale, scale);
  return x;
}

Mat random_mat(Rng& rng, int r, int c, double scale = 1.5) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

}  // namespace

TEST_CASE("spd operator: solve inverts apply") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + rng.uniform_int(6);
    Mat a = random_mat(rng, n, n);
    Mat q = a * a.transpose() + 0.5 * Mat::Identity(n, n);
    auto op = SpdOperator::dense(q);
    Vec x = random_vec(rng, n);
    CHECK((op.solve(op.apply(x)) - x).norm() <= 1e-10 * std::max(1.0, x.norm()));
    CHECK(x.dot(op.apply(x)) > 0.0);
  }
  auto s = SpdOperator::scaled_identity(3, 2.5);
  Vec x(3);
  x << 1, -2, 4;
  CHECK((s.apply(x) - 2.5 * x).norm() == 0.0);
  CHECK((s.solve(x) - x / 2.5).norm() <= 1e-16);
}

TEST_CASE("averaged iteration: identity map fixes every start immediately") {
  auto id = [](const Vec& v) { return v; };
  Vec v0(2);
  v0 << 3, -1;
  auto state = picard_opial(id, v0, 0.2, 1e-10, 100);
  CHECK(state.converged);
  CHECK(state.iterations_used == 1);
  CHECK((state.v - v0).norm() <= 1e-15 * v0.norm());
}

TEST_CASE("averaged iteration damps the sign flip by 0.6 per step") {
  auto flip = [](const Vec& v) { return Vec(-v); };
  Vec v = Vec::Ones(1);
  // one averaged step at kappa=0.2 multiplies by (0.2 - 0.8) = -0.6
  for (int n = 1; n <= 30; ++n) {
    auto state = picard_opial(flip, v, 0.2, 0.0, 1);
    CHECK(std::abs(std::abs(state.v[0]) - 0.6 * std::abs(v[0])) <=
          4e-16 * std::abs(v[0]));
    CHECK(state.v[0] * v[0] < 0.0);
    v = state.v;
  }

  auto full = picard_opial(flip, Vec::Ones(1), 0.2, 1e-12, 1000);
  CHECK(full.converged);
  CHECK(std::abs(full.v[0]) <= 1e-11);
}

TEST_CASE("plain picard oscillates on the sign flip and reports failure") {
  auto flip = [](const Vec& v) { return Vec(-v); };
  auto state = picard_opial(flip, Vec::Ones(1), 0.0, 1e-10, 500);
  CHECK_FALSE(state.converged);
  CHECK(state.iterations_used == 500);
  CHECK(std::abs(std::abs(state.v[0]) - 1.0) <= 1e-15);
  CHECK(state.final_step_norm == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("averaged iteration reaches the affine fixed point quickly") {
  auto affine = [](const Vec& v) { return Vec(0.5 * v + Vec::Ones(1)); };
  auto state = picard_opial(affine, Vec::Zero(1), 0.2, 1e-10, 200);
  CHECK(state.converged);
  CHECK(state.iterations_used <= 60);
  CHECK(state.v[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("averaged iteration validates kappa") {
  auto id = [](const Vec& v) { return v; };
  CHECK_THROWS_AS(picard_opial(id, Vec::Zero(1), -0.1, 1e-10, 10),
                  InputError);
  CHECK_THROWS_AS(picard_opial(id, Vec::Zero(1), 1.0, 1e-10, 10), InputError);
  CHECK_NOTHROW(picard_opial(id, Vec::Zero(1), 0.0, 1e-10, 10));
}

TEST_CASE("update map: zero penalty weight gives the zero map") {
  Vec x(2);
  x << 1.5, -0.25;
  const ProxPenalty pen = ProxPenalty::l1(0.0);
  const auto b = LinearOperator::identity(2);
  const auto q = SpdOperator::identity(2);
  auto h = build_H(pen, b, q, x, 1.0);
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial)
    CHECK(h(random_vec(rng, 2)).norm() == 0.0);
}

TEST_CASE("update map: zero B reduces to the prox complement") {
  SpMat zb(2, 2);
  const auto b = LinearOperator::sparse(zb);
  Vec x(2);
  x << 0.3, 0.9;
  const ProxPenalty pen = ProxPenalty::l1(1.0);
  const auto q = SpdOperator::identity(2);
  auto h = build_H(pen, b, q, x, 1.0);
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    Vec v = random_vec(rng, 2);
    CHECK((h(v) - (v - prox_l1(v, 1.0))).norm() <= 1e-15);
  }
}

TEST_CASE("update map at the boundary step becomes constant for B = Q = I") {
  // with lam = 1 the linear part vanishes, so the map sends every v to
  // x - prox(x)
  Vec x(3);
  x << 3, -1, 0.5;
  const ProxPenalty pen = ProxPenalty::l1(1.0);
  const auto b = LinearOperator::identity(3);
  const auto q = SpdOperator::identity(3);
  auto h = build_H(pen, b, q, x, 1.0);
  Vec expect = x - prox_l1(x, 1.0);
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial)
    CHECK((h(random_vec(rng, 3, 4.0)) - expect).norm() <= 1e-15);
}

TEST_CASE("update map matches hand substitution at an interior step") {
  // lam = 0.5, B = Q = I: v maps to a - prox_{2 omega}(a) with a = v/2 + x
  Vec x(1);
  x << 1.5;
  const ProxPenalty pen = ProxPenalty::l1(1.0);
  const auto b = LinearOperator::identity(1);
  const auto q = SpdOperator::identity(1);
  auto h = build_H(pen, b, q, x, 0.5);
  Vec v(1);
  v << 1.0;
  CHECK(h(v)[0] == doctest::Approx(2.0).epsilon(1e-15));  // a=2, prox->0
  v << 0.0;
  CHECK(h(v)[0] == doctest::Approx(1.5).epsilon(1e-15));
  v << 2.0;  // a=2.5, prox_{2l1}(2.5)=0.5, H=2.0: the fixed point
  CHECK(h(v)[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("update map rejects inadmissible steps and reports the spectrum") {
  auto b = fused_difference_operator(3);  // B B^T has top eigenvalue 3
  Vec x = Vec::Zero(3);
  try {
    build_H(ProxPenalty::l1(1.0), b, SpdOperator::identity(3), x, 0.7);
    FAIL("expected admissibility rejection");
  } catch (const AdmissibilityError& e) {
    CHECK(e.lambda_max == doctest::Approx(3.0).epsilon(1e-6));
  }
  CHECK_NOTHROW(
      build_H(ProxPenalty::l1(1.0), b, SpdOperator::identity(3), x, 2.0 / 3.0));
}

TEST_CASE("update map is nonexpansive for admissible steps") {
  Rng rng(5);
  const ProxPenalty pen = ProxPenalty::l1(0.8);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + rng.uniform_int(3), m = 2 + rng.uniform_int(3);
    const auto b = LinearOperator::dense(random_mat(rng, m, d));
    const auto q = SpdOperator::identity(d);
    const Vec x = random_vec(rng, d);
    const double lmax = gram_lambda_max(b, q);
    const double lam = rng.uniform(0.2, 1.0) * 2.0 / lmax;
    auto h = build_H(pen, b, q, x, lam);
    Vec v = random_vec(rng, m, 3.0), w = random_vec(rng, m, 3.0);
    CHECK((h(v) - h(w)).norm() <= (v - w).norm() + 1e-12);
  }
}

TEST_CASE("default step size follows the spectral rule") {
  // difference operator on d=3: eigenvalues of B B^T are 3 and 1
  SpectralInterval si;
  const double lam = default_lambda(fused_difference_operator(3),
                                    SpdOperator::identity(3), &si);
  CHECK(si.lambda_max == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(si.lambda_min == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(lam == doctest::Approx(0.5).epsilon(1e-6));

  // rank-deficient gram: B = [1;1] gives eigenvalues 2 and 0, so the rule
  // lands on the nonexpansive boundary 2/mu_max = 1
  Mat col(2, 1);
  col << 1, 1;
  SpectralInterval si2;
  const double lam2 =
      default_lambda(LinearOperator::dense(col), SpdOperator::identity(1), &si2);
  CHECK(si2.lambda_max == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(si2.lambda_min <= 1e-6);
  CHECK(lam2 == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("composite prox with identity B matches the direct operators") {
  Vec x(3);
  x << 3, -1, 0.5;
  auto r = prox_composite(ProxPenalty::l1(1.0), LinearOperator::identity(3), x,
                          1.0, 0.2, 1e-12, 2000);
  CHECK(r.state.converged);
  CHECK((r.u - prox_l1(x, 1.0)).norm() <= 1e-10);

  Rng rng(6);
  std::vector<ProxPenalty> pens = {
      ProxPenalty::l1(0.7),       ProxPenalty::l2(1.2),
      ProxPenalty::linf(0.9),     ProxPenalty::lp_power(3.0, 0.4),
      ProxPenalty::lp_norm(3.0, 0.8), ProxPenalty::group_l2({0, 2, 4}, 0.6)};
  for (const auto& pen : pens) {
    for (int trial = 0; trial < 100; ++trial) {
      Vec z = random_vec(rng, 4, 3.0);
      auto res = prox_composite(pen, LinearOperator::identity(4), z, 1.0, 0.2,
                                1e-12, 5000);
      CHECK(res.state.converged);
      CHECK((res.u - prox_penalty(pen, z, 1.0)).norm() <= 1e-8);
    }
  }
}

TEST_CASE("composite prox: zero weight returns the input") {
  Vec x(2);
  x << 0.4, -2.0;
  auto r = prox_composite(ProxPenalty::l1(0.0), fused_difference_operator(2), x,
                          0.5, 0.2, 1e-10, 100);
  CHECK(r.state.converged);
  CHECK((r.u - x).norm() == 0.0);
}

TEST_CASE("composite prox couples coordinates through the difference map") {
  Mat bm(1, 2);
  bm << 1, -1;
  Vec x(2);
  x << 1, 0;
  auto r = prox_composite(ProxPenalty::l1(0.5), LinearOperator::dense(bm), x,
                          1.0, 0.2, 1e-13, 5000);
  CHECK(r.state.converged);
  CHECK(r.u[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.u[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("composite prox agrees with the dual reference solver") {
  Rng rng(7);
  std::vector<ProxPenalty> pens = {ProxPenalty::l1(0.6), ProxPenalty::l2(0.8),
                                   ProxPenalty::linf(0.5),
                                   ProxPenalty::group_l2({0, 2, 4}, 0.7)};
  for (const auto& pen : pens) {
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 3, m = 4;
      auto b = LinearOperator::dense(random_mat(rng, m, d));
      Vec x = random_vec(rng, d, 2.0);
      const double lam = default_lambda(b, SpdOperator::identity(d));
      auto r = prox_composite(pen, b, x, lam, 0.2, 1e-12, 20000);
      CHECK(r.state.converged);
      Vec ref = oracle::dual_prox(pen, b, x);
      const double f_mine =
          0.5 * (r.u - x).squaredNorm() + oracle::penalty_value(pen, b.apply(r.u));
      const double f_ref =
          0.5 * (ref - x).squaredNorm() + oracle::penalty_value(pen, b.apply(ref));
      CHECK(f_mine <= f_ref + 1e-8);
      CHECK((r.u - ref).norm() <= 1e-5);
    }
  }
}

TEST_CASE("composite prox certifies its own optimality") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + rng.uniform_int(4), m = 2 + rng.uniform_int(4);
    auto b = LinearOperator::dense(random_mat(rng, m, d));
    Vec x = random_vec(rng, d, 2.0);
    const double lam = default_lambda(b, SpdOperator::identity(d));
    const ProxPenalty pen =
        trial % 2 == 0 ? ProxPenalty::l1(0.7) : ProxPenalty::l2(0.9);
    const double tol = 1e-11;
    auto r = prox_composite(pen, b, x, lam, 0.2, tol, 50000);
    CHECK(r.state.converged);
    Vec s = lam * r.state.v;
    CHECK(composite_optimality_residual(pen, b, x, r.u, s) <= 10 * tol);
  }
}

TEST_CASE("composite prox output beats random candidate points") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 3, m = 3;
    auto b = LinearOperator::dense(random_mat(rng, m, d));
    Vec x = random_vec(rng, d, 2.0);
    const double lam = default_lambda(b, SpdOperator::identity(d));
    auto r = prox_composite(ProxPenalty::l1(0.8), b, x, lam, 0.2, 1e-12, 20000);
    REQUIRE(r.state.converged);
    auto value = [&](const Vec& y) {
      return 0.5 * (y - x).squaredNorm() +
             oracle::penalty_value(ProxPenalty::l1(0.8), b.apply(y));
    };
    const double f_star = value(r.u);
    for (int c = 0; c < 10000; ++c) {
      Vec cand = r.u + random_vec(rng, d, 0.5 * (1 + c % 4));
      CHECK(f_star <= value(cand) + 1e-10);
    }
  }
}

TEST_CASE("warm starting resumes near the fixed point") {
  Rng rng(10);
  auto b = fused_difference_operator(20);
  Vec x = random_vec(rng, 20, 3.0);
  const double lam = default_lambda(b, SpdOperator::identity(20));
  auto cold = prox_composite(ProxPenalty::l1(0.6), b, x, lam, 0.2, 1e-12, 50000);
  REQUIRE(cold.state.converged);
  auto warm = prox_composite(ProxPenalty::l1(0.6), b, x, lam, 0.2, 1e-12, 50000,
                             &cold.state);
  CHECK(warm.state.converged);
  CHECK(warm.state.iterations_used < cold.state.iterations_used);
  CHECK(warm.state.iterations_used <= 2);
  CHECK((warm.u - cold.u).norm() <= 1e-9);
}

TEST_CASE("pure picard agrees with averaging in the contraction regime") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 4;
    Mat bm = random_mat(rng, d, d) + 2.0 * Mat::Identity(d, d);
    auto b = LinearOperator::dense(bm);
    Vec x = random_vec(rng, d, 2.0);
    const double lmax = gram_lambda_max(b, SpdOperator::identity(d));
    const double lam = 1.2 / lmax;  // strictly inside (0, 2/lmax)
    auto averaged =
        prox_composite(ProxPenalty::l1(0.5), b, x, lam, 0.2, 1e-12, 50000);
    auto plain =
        prox_composite(ProxPenalty::l1(0.5), b, x, lam, 0.0, 1e-12, 50000);
    CHECK(averaged.state.converged);
    CHECK(plain.state.converged);
    CHECK((averaged.u - plain.u).norm() <= 1e-8);
  }
}

TEST_CASE("generalized quadratic minimizer") {
  // Q = I reduces to the composite prox
  Rng rng(12);
  auto b = fused_difference_operator(4);
  Vec x = random_vec(rng, 4, 2.0);
  const double lam = default_lambda(b, SpdOperator::identity(4));
  Vec u1 = quad_min_composite(ProxPenalty::l1(0.7), b, SpdOperator::identity(4),
                              x, lam, 0.2, 1e-12, 20000);
  auto u2 = prox_composite(ProxPenalty::l1(0.7), b, x, lam, 0.2, 1e-12, 20000);
  CHECK((u1 - u2.u).norm() <= 1e-9);

  // zero penalty: minimizer of the quadratic alone
  Mat qd = Mat::Zero(2, 2);
  qd(0, 0) = 2;
  qd(1, 1) = 4;
  Vec x2(2);
  x2 << 2, 4;
  Vec u3 = quad_min_composite(ProxPenalty::l1(0.0), LinearOperator::identity(2),
                              SpdOperator::dense(qd), x2, 0.4, 0.2, 1e-12, 100);
  CHECK(u3[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(u3[1] == doctest::Approx(1.0).epsilon(1e-10));

  // separable KKT case: coordinate 1 solves 2y = 3 - sign, coordinate 2
  // stays at zero because |x| <= 1
  Mat qd2 = Mat::Zero(2, 2);
  qd2(0, 0) = 2;
  qd2(1, 1) = 1;
  Vec x3(2);
  x3 << 3, 0.5;
  SpectralInterval si;
  const double lam3 = default_lambda(LinearOperator::identity(2),
                                     SpdOperator::dense(qd2), &si);
  Vec u4 = quad_min_composite(ProxPenalty::l1(1.0), LinearOperator::identity(2),
                              SpdOperator::dense(qd2), x3, lam3, 0.2, 1e-13,
                              20000);
  CHECK(u4[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(u4[1]) <= 1e-9);
}

TEST_CASE("generalized minimizer beats candidates under a random metric") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 3;
    Mat a = random_mat(rng, d, d);
    Mat q = a * a.transpose() + Mat::Identity(d, d);
    auto qop = SpdOperator::dense(q);
    auto b = fused_difference_operator(d);
    Vec x = random_vec(rng, d, 2.0);
    const double lam = default_lambda(b, qop);
    Vec u = quad_min_composite(ProxPenalty::l1(0.8), b, qop, x, lam, 0.2, 1e-12,
                               50000);
    auto value = [&](const Vec& y) {
      return 0.5 * y.dot(q * y) - x.dot(y) +
             oracle::penalty_value(ProxPenalty::l1(0.8), b.apply(y));
    };
    const double f_star = value(u);
    for (int c = 0; c < 2000; ++c)
      CHECK(f_star <= value(u + random_vec(rng, d, 0.3)) + 1e-9);
  }
}
