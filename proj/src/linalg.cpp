#include "cprox/linalg.hpp"

#include <Eigen/SVD>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace cprox {

LinearOperator LinearOperator::identity(int n) {
  if (n < 0) throw InputError("identity operator: negative size");
  LinearOperator op;
  op.kind_ = Kind::Identity;
  op.rows_ = op.cols_ = n;
  return op;
}

LinearOperator LinearOperator::dense(Mat m) {
  LinearOperator op;
  op.kind_ = Kind::Dense;
  op.rows_ = static_cast<int>(m.rows());
  op.cols_ = static_cast<int>(m.cols());
  op.dense_ = std::move(m);
  return op;
}

LinearOperator LinearOperator::sparse(SpMat m) {
  LinearOperator op;
  op.kind_ = Kind::Sparse;
  op.rows_ = static_cast<int>(m.rows());
  op.cols_ = static_cast<int>(m.cols());
  op.sp_ = std::move(m);
  op.sp_.makeCompressed();
  return op;
}

LinearOperator LinearOperator::gram(LinearOperator base) {
  LinearOperator op;
  op.kind_ = Kind::Gram;
  op.rows_ = op.cols_ = base.rows();
  op.base_ = std::make_shared<const LinearOperator>(std::move(base));
  return op;
}

Vec LinearOperator::apply(const Vec& x) const {
  if (x.size() != cols_) throw DimError("apply: size mismatch");
  switch (kind_) {
    case Kind::Identity:
      return x;
    case Kind::Dense:
      return dense_ * x;
    case Kind::Sparse:
      return sp_ * x;
    case Kind::Gram:
      return base_->apply(base_->apply_t(x));
  }
  throw InputError("apply: bad kind");
}

Vec LinearOperator::apply_t(const Vec& z) const {
  if (z.size() != rows_) throw DimError("apply_t: size mismatch");
  switch (kind_) {
    case Kind::Identity:
      return z;
    case Kind::Dense:
      return dense_.transpose() * z;
    case Kind::Sparse:
      return sp_.transpose() * z;
    case Kind::Gram:
      return base_->apply(base_->apply_t(z));  // symmetric
  }
  throw InputError("apply_t: bad kind");
}

double LinearOperator::frob_norm() const {
  switch (kind_) {
    case Kind::Identity:
      return std::sqrt(static_cast<double>(rows_));
    case Kind::Dense:
      return dense_.norm();
    case Kind::Sparse:
      return sp_.norm();
    case Kind::Gram: {
      // ||M M^T||_F <= ||M||_F^2; exact value not needed anywhere.
      double f = base_->frob_norm();
      return f * f;
    }
  }
  return 0.0;
}

Mat LinearOperator::to_dense() const {
  switch (kind_) {
    case Kind::Identity:
      return Mat::Identity(rows_, cols_);
    case Kind::Dense:
      return dense_;
    case Kind::Sparse:
      return Mat(sp_);
    case Kind::Gram: {
      Mat b = base_->to_dense();
      return b * b.transpose();
    }
  }
  return {};
}

SpectralInterval power_iteration_extremes(const LinearOperator& gram,
                                          double tol, int max_iter,
                                          std::uint64_t seed) {
  if (gram.rows() != gram.cols())
    throw DimError("power_iteration_extremes: operator not square");
  const int n = gram.rows();
  SpectralInterval out;
  if (n == 0) return out;

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto top_eig = [&](const std::function<Vec(const Vec&)>& apply,
                     bool* ok) -> double {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    double nv = v.norm();
    if (nv == 0.0) v[0] = 1.0, nv = 1.0;
    v /= nv;
    double lam = 0.0;
    *ok = false;
    for (int it = 0; it < max_iter; ++it) {
      Vec w = apply(v);
      double lam_new = v.dot(w);
      double wn = w.norm();
      if (wn <= 1e-300) {  // operator annihilates v: eigenvalue 0
        *ok = true;
        return 0.0;
      }
      v = w / wn;
      if (std::abs(lam_new - lam) <= tol * std::max(1.0, std::abs(lam_new))) {
        *ok = true;
        return lam_new;
      }
      lam = lam_new;
    }
    return lam;
  };

  bool ok1 = false, ok2 = false;
  out.lambda_max =
      std::max(0.0, top_eig([&](const Vec& x) { return gram.apply(x); }, &ok1));
  // Largest eigenvalue of (shift*I - G) is shift - lambda_min(G).
  const double shift = out.lambda_max * (1.0 + 10.0 * tol) + 1e-300;
  double top_shifted = top_eig(
      [&](const Vec& x) { return Vec(shift * x - gram.apply(x)); }, &ok2);
  out.lambda_min = std::max(0.0, shift - std::max(0.0, top_shifted));
  if (out.lambda_min > out.lambda_max) out.lambda_min = out.lambda_max;
  out.converged = ok1 && ok2;
  return out;
}

Svd svd_small(const Mat& x) {
  if (!x.allFinite()) throw InputError("svd_small: NaN/Inf in input");
  Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out;
  out.U = svd.matrixU();
  out.sigma = svd.singularValues();
  out.V = svd.matrixV();
  return out;
}

LipschitzResult lipschitz_square_loss(const LinearOperator& a) {
  LipschitzResult out;
  if (a.is_identity()) {
    out.L = 1.0;
    return out;
  }
  const double size = static_cast<double>(a.rows()) * a.cols();
  if (size <= 1e6) {
    Mat d = a.to_dense();
    if (!d.allFinite()) throw InputError("lipschitz_square_loss: NaN/Inf");
    Eigen::BDCSVD<Mat> svd(d);
    double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    out.L = smax * smax;
    return out;
  }
  double f = a.frob_norm();
  out.L = f * f;
  out.frobenius_bound = true;
  return out;
}

// ---- IO ----

void write_matrix_market(const std::string& path, const SpMat& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  f << "%%MatrixMarket matrix coordinate real general\n";
  f << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      f << (it.row() + 1) << " " << (it.col() + 1) << " "
        << format_double(it.value()) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

void write_matrix_market_dense(const std::string& path, const Mat& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  f << "%%MatrixMarket matrix array real general\n";
  f << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index j = 0; j < m.cols(); ++j)  // column-major per the format
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      f << format_double(m(i, j)) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

SpMat read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  std::string header;
  if (!std::getline(f, header) || header.rfind("%%MatrixMarket", 0) != 0)
    throw IoError("not a Matrix Market file: " + path);
  std::istringstream hs(header);
  std::string tag, object, fmt, field, symmetry;
  hs >> tag >> object >> fmt >> field >> symmetry;
  if (object != "matrix" || (fmt != "coordinate" && fmt != "array") ||
      field != "real" || symmetry != "general")
    throw IoError("unsupported Matrix Market header: " + header);
  std::string line;
  auto next_data_line = [&]() -> std::string {
    while (std::getline(f, line)) {
      size_t i = line.find_first_not_of(" \t\r");
      if (i == std::string::npos || line[i] == '%') continue;
      return line;
    }
    throw IoError("unexpected end of file: " + path);
  };
  if (fmt == "coordinate") {
    std::istringstream ds(next_data_line());
    long rows = 0, cols = 0, nnz = 0;
    if (!(ds >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw IoError("bad size line: " + path);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
      std::istringstream es(next_data_line());
      long i = 0, j = 0;
      double v = 0.0;
      if (!(es >> i >> j >> v) || i < 1 || i > rows || j < 1 || j > cols)
        throw IoError("bad entry: " + path);
      trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    }
    SpMat m(static_cast<int>(rows), static_cast<int>(cols));
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
  }
  // array: dense column-major listing
  std::istringstream ds(next_data_line());
  long rows = 0, cols = 0;
  if (!(ds >> rows >> cols) || rows < 0 || cols < 0)
    throw IoError("bad size line: " + path);
  std::vector<Eigen::Triplet<double>> trips;
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) {
      std::istringstream es(next_data_line());
      double v = 0.0;
      if (!(es >> v)) throw IoError("bad entry: " + path);
      if (v != 0.0)
        trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    }
  SpMat m(static_cast<int>(rows), static_cast<int>(cols));
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void write_vector(const std::string& path, const Vec& v) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  for (Eigen::Index i = 0; i < v.size(); ++i) f << format_double(v[i]) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

Vec read_vector(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(f, line)) {
    size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    std::istringstream ls(line);
    double v = 0.0;
    if (!(ls >> v)) throw IoError("bad vector entry: " + path);
    vals.push_back(v);
  }
  Vec out(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) out[static_cast<Eigen::Index>(i)] = vals[i];
  return out;
}

// ---- RNG ----

std::uint64_t Rng::next() {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  // Box-Muller; fresh pair each call keeps streams position-independent.
  double u1 = uniform(), u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

int Rng::uniform_int(int n) {
  // modulo bias negligible for n << 2^64 and irrelevant to determinism
  return static_cast<int>(next() % static_cast<std::uint64_t>(n));
}

Rng derive_stream(std::uint64_t master, std::uint64_t index) {
  Rng mix(master ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  std::uint64_t s = mix.next();
  return Rng(s);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace cprox
