#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace cprox {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct DimError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A linear map with forward and transpose application. Concrete storage is
// identity / dense / sparse, plus a symmetric "gram" view M M^T of another
// operator so spectral estimation can run without materializing the product.
class LinearOperator {
 public:
  enum class Kind { Identity, Dense, Sparse, Gram };

  LinearOperator() = default;  // 0x0 identity; reassign before use

  static LinearOperator identity(int n);
  static LinearOperator dense(Mat m);
  static LinearOperator sparse(SpMat m);
  static LinearOperator gram(LinearOperator base);  // base * base^T

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Kind kind() const { return kind_; }
  bool is_identity() const { return kind_ == Kind::Identity; }

  Vec apply(const Vec& x) const;    // B x
  Vec apply_t(const Vec& z) const;  // B^T z

  double frob_norm() const;
  Mat to_dense() const;  // small operators only (tests, SVD paths)

  const SpMat* sparse_backing() const {
    return kind_ == Kind::Sparse ? &sp_ : nullptr;
  }

 private:
  Kind kind_ = Kind::Identity;
  int rows_ = 0, cols_ = 0;
  Mat dense_;
  SpMat sp_;
  std::shared_ptr<const LinearOperator> base_;  // Gram only
};

struct SpectralInterval {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  bool converged = true;  // false: iteration cap hit, values are best estimates
};

// Extreme eigenvalues of a symmetric PSD operator by power iteration;
// lambda_min via a second power iteration on (lambda_max*I - G).
SpectralInterval power_iteration_extremes(const LinearOperator& gram,
                                          double tol, int max_iter,
                                          std::uint64_t seed);

struct Svd {
  Mat U;
  Vec sigma;  // non-increasing, >= 0
  Mat V;
};
Svd svd_small(const Mat& x);

struct LipschitzResult {
  double L = 0.0;
  bool frobenius_bound = false;  // true when the value is only an upper bound
};
// L = sigma_max(A)^2 for the loss 0.5*||Ax - y||^2; Frobenius fallback when
// the operator is too large to densify.
LipschitzResult lipschitz_square_loss(const LinearOperator& a);

// Matrix Market coordinate (sparse) and array (dense) formats, plus plain
// one-value-per-line vectors. All text IO is locale-independent, LF, %.17g.
void write_matrix_market(const std::string& path, const SpMat& m);
void write_matrix_market_dense(const std::string& path, const Mat& m);
SpMat read_matrix_market(const std::string& path);
void write_vector(const std::string& path, const Vec& v);
Vec read_vector(const std::string& path);

// Deterministic RNG: splitmix64 core with explicit stream derivation, so
// parallel runs are schedule-independent.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // Box-Muller, no cached spare
  int uniform_int(int n);                // {0, ..., n-1}
};
Rng derive_stream(std::uint64_t master, std::uint64_t index);

std::string format_double(double v);  // %.17g

}  // namespace cprox
