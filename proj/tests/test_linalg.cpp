#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cprox/builders.hpp"
#include "cprox/linalg.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace cprox;

namespace {

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "cprox_linalg_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("identity operator applies as identity") {
  auto op = LinearOperator::identity(2);
  Vec x(2);
  x << 1, 2;
  CHECK((op.apply(x) - x).norm() == 0.0);
  CHECK((op.apply_t(x) - x).norm() == 0.0);
}

TEST_CASE("zero operator maps everything to zero") {
  SpMat z(2, 2);
  auto op = LinearOperator::sparse(z);
  Vec x(2);
  x << 5, 7;
  CHECK(op.apply(x).norm() == 0.0);
}

TEST_CASE("difference operator rows produce successive differences") {
  auto b = fused_difference_operator(3);
  Vec x(3);
  x << 3, 1, 4;
  Vec r = b.apply(x);
  CHECK(r[0] == doctest::Approx(2).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(-3).epsilon(1e-15));
}

TEST_CASE("apply rejects mismatched dimensions") {
  auto op = LinearOperator::identity(3);
  Vec x(2);
  x << 1, 2;
  CHECK_THROWS_AS(op.apply(x), DimError);
  CHECK_THROWS_AS(op.apply_t(x), DimError);
}

TEST_CASE("adjoint consistency on random operators") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + rng.uniform_int(8), d = 1 + rng.uniform_int(8);
    Mat bm(m, d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) bm(i, j) = rng.uniform(-2, 2);
    auto op = LinearOperator::dense(bm);
    Vec x(d), z(m);
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    for (int i = 0; i < m; ++i) z[i] = rng.normal();
    const double lhs = op.apply(x).dot(z);
    const double rhs = x.dot(op.apply_t(z));
    const double bound = 1e-12 * (1.0 + x.norm() * z.norm() * op.frob_norm());
    CHECK(std::abs(lhs - rhs) <= bound);
  }
}

TEST_CASE("gram view multiplies by B B^T") {
  Mat bm(2, 3);
  bm << 1, 0, 2, 0, 1, -1;
  auto g = LinearOperator::gram(LinearOperator::dense(bm));
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 2);
  Vec v(2);
  v << 1, 1;
  Vec expect = bm * (bm.transpose() * v);
  CHECK((g.apply(v) - expect).norm() <= 1e-14);
}

TEST_CASE("power iteration: identity spectrum") {
  auto interval =
      power_iteration_extremes(LinearOperator::identity(3), 1e-12, 5000, 1);
  CHECK(interval.lambda_max == doctest::Approx(1).epsilon(1e-10));
  CHECK(interval.lambda_min == doctest::Approx(1).epsilon(1e-10));
}

TEST_CASE("power iteration: diagonal spectrum") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 1;
  auto interval =
      power_iteration_extremes(LinearOperator::dense(d), 1e-12, 20000, 1);
  CHECK(interval.lambda_max == doctest::Approx(4).epsilon(1e-9));
  CHECK(interval.lambda_min == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("power iteration: difference-operator gram on d=3") {
  // B B^T = [[2,-1],[-1,2]], eigenvalues 3 and 1 by its characteristic
  // polynomial (t-2)^2 - 1.
  auto g = LinearOperator::gram(fused_difference_operator(3));
  auto interval = power_iteration_extremes(g, 1e-12, 20000, 1);
  CHECK(interval.lambda_max == doctest::Approx(3).epsilon(1e-9));
  CHECK(interval.lambda_min == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("power iteration rejects non-square operators") {
  Mat bm(2, 3);
  bm.setZero();
  CHECK_THROWS_AS(
      power_iteration_extremes(LinearOperator::dense(bm), 1e-10, 100, 1),
      DimError);
}

TEST_CASE("power iteration matches exact eigenvalues on random diagonals") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + rng.uniform_int(7);
    Mat d = Mat::Zero(n, n);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = rng.uniform(0.1, 10.0);
      d(i, i) = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    auto interval = power_iteration_extremes(LinearOperator::dense(d), 1e-12,
                                             100000, 17 + trial);
    CHECK(interval.lambda_max == doctest::Approx(hi).epsilon(1e-7));
    CHECK(interval.lambda_min == doctest::Approx(lo).epsilon(1e-7));
  }
}

TEST_CASE("svd of a positive diagonal matrix") {
  Mat x = Mat::Zero(2, 2);
  x(0, 0) = 3;
  x(1, 1) = 2;
  auto s = svd_small(x);
  CHECK(s.sigma[0] == doctest::Approx(3).epsilon(1e-12));
  CHECK(s.sigma[1] == doctest::Approx(2).epsilon(1e-12));
  CHECK((s.U - Mat::Identity(2, 2)).norm() <= 1e-9);
  CHECK((s.V - Mat::Identity(2, 2)).norm() <= 1e-9);
}

TEST_CASE("svd of the zero matrix") {
  auto s = svd_small(Mat::Zero(2, 2));
  CHECK(s.sigma[0] == 0.0);
  CHECK(s.sigma[1] == 0.0);
}

TEST_CASE("svd of the swap matrix has unit singular values") {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  auto s = svd_small(x);
  CHECK(s.sigma[0] == doctest::Approx(1).epsilon(1e-12));
  CHECK(s.sigma[1] == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("svd rejects non-finite input") {
  Mat x(2, 2);
  x.setZero();
  x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_small(x), InputError);
}

TEST_CASE("svd reconstruction and orthonormality on random matrices") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int r = 1 + rng.uniform_int(20), c = 1 + rng.uniform_int(20);
    Mat x(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) x(i, j) = rng.normal();
    auto s = svd_small(x);
    const int k = static_cast<int>(s.sigma.size());
    for (int i = 1; i < k; ++i) CHECK(s.sigma[i] <= s.sigma[i - 1]);
    CHECK(s.sigma[k - 1] >= 0.0);
    Mat recon = s.U * s.sigma.asDiagonal() * s.V.transpose();
    CHECK((recon - x).norm() <= 1e-9 * std::max(1.0, x.norm()));
    CHECK((s.U.transpose() * s.U - Mat::Identity(k, k)).norm() <= 1e-9);
    CHECK((s.V.transpose() * s.V - Mat::Identity(k, k)).norm() <= 1e-9);
  }
}

TEST_CASE("lipschitz constant of the square loss") {
  CHECK(lipschitz_square_loss(LinearOperator::identity(4)).L ==
        doctest::Approx(1).epsilon(1e-14));
  Mat two = 2.0 * Mat::Identity(3, 3);
  CHECK(lipschitz_square_loss(LinearOperator::dense(two)).L ==
        doctest::Approx(4).epsilon(1e-12));
  Mat a(2, 2);
  a << 1, 1, 0, 1;
  // largest eigenvalue of A^T A = [[1,1],[1,2]]: root of t^2 - 3t + 1.
  const double expect = (3.0 + std::sqrt(5.0)) / 2.0;
  auto r = lipschitz_square_loss(LinearOperator::dense(a));
  CHECK(r.L == doctest::Approx(expect).epsilon(1e-12));
  CHECK_FALSE(r.frobenius_bound);
}

TEST_CASE("lipschitz constant falls back to the Frobenius bound when huge") {
  SpMat big(1100, 1000);
  std::vector<Eigen::Triplet<double>> trip{{0, 0, 3.0}, {1, 1, 4.0}};
  big.setFromTriplets(trip.begin(), trip.end());
  auto r = lipschitz_square_loss(LinearOperator::sparse(big));
  CHECK(r.frobenius_bound);
  CHECK(r.L == doctest::Approx(25.0).epsilon(1e-12));  // ||A||_F^2 = 9 + 16
  CHECK(r.L >= 16.0);                                  // never below sigma_max^2
}

TEST_CASE("matrix market coordinate round trip") {
  SpMat m(3, 4);
  std::vector<Eigen::Triplet<double>> trip{
      {0, 0, 1.25}, {2, 3, -0.7531}, {1, 2, 1e-17}};
  m.setFromTriplets(trip.begin(), trip.end());
  const std::string path = temp_path("coord.mtx");
  write_matrix_market(path, m);
  SpMat back = read_matrix_market(path);
  CHECK(back.rows() == 3);
  CHECK(back.cols() == 4);
  CHECK((Mat(back) - Mat(m)).norm() == 0.0);
}

TEST_CASE("matrix market array round trip") {
  Mat m(2, 3);
  m << 1.5, -2, 3.25, 0, 0.1, 7;
  const std::string path = temp_path("array.mtx");
  write_matrix_market_dense(path, m);
  SpMat back = read_matrix_market(path);
  CHECK((Mat(back) - m).norm() == 0.0);
}

TEST_CASE("matrix market rejects malformed headers") {
  const std::string path = temp_path("bad.mtx");
  std::ofstream f(path);
  f << "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 2\n";
  f.close();
  CHECK_THROWS_AS(read_matrix_market(path), IoError);
  CHECK_THROWS_AS(read_matrix_market(temp_path("missing.mtx")), IoError);
}

TEST_CASE("vector IO round trips doubles exactly") {
  Rng rng(11);
  Vec v(50);
  for (int i = 0; i < 50; ++i) v[i] = rng.normal() * std::pow(10.0, rng.uniform_int(20) - 10);
  const std::string path = temp_path("vec.txt");
  write_vector(path, v);
  Vec back = read_vector(path);
  REQUIRE(back.size() == v.size());
  for (int i = 0; i < 50; ++i) CHECK(back[i] == v[i]);
}

TEST_CASE("format_double survives a parse round trip") {
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform_int(40) - 20);
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("rng is deterministic and stays in range") {
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int k = r.uniform_int(7);
    CHECK(k >= 0);
    CHECK(k < 7);
    CHECK(std::isfinite(r.normal()));
    const double w = r.uniform(-2.0, 3.0);
    CHECK(w >= -2.0);
    CHECK(w < 3.0);
  }
}

TEST_CASE("derived streams differ from each other and from the master") {
  Rng master(1);
  Rng s0 = derive_stream(1, 0);
  Rng s1 = derive_stream(1, 1);
  CHECK(s0.next() != s1.next());
  CHECK(derive_stream(1, 0).next() == derive_stream(1, 0).next());
  CHECK(master.next() != derive_stream(1, 0).next());
}
