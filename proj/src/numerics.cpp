#include "daemb/numerics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace daemb {

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void check_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    std::ostringstream msg;
    msg << what << ": matrix contains non-finite entries";
    throw std::runtime_error(msg.str());
  }
}

namespace {

void check_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    std::ostringstream msg;
    msg << what << ": matrix is not symmetric (max asymmetry " << asym << ")";
    throw std::invalid_argument(msg.str());
  }
}

// Thin QR orthonormal basis of the column space.
Matrix orthonormalize(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  const Index k = std::min(a.rows(), a.cols());
  return qr.householderQ() * Matrix::Identity(a.rows(), k);
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "matmul: dimension mismatch (" << a.rows() << "x" << a.cols()
        << " * " << b.rows() << "x" << b.cols() << ")";
    throw std::invalid_argument(msg.str());
  }
  check_finite(a, "matmul lhs");
  check_finite(b, "matmul rhs");
  return a * b;
}

Matrix cholesky_psd(const Matrix& a, double jitter) {
  if (jitter < 0.0) throw std::invalid_argument("cholesky_psd: negative jitter");
  check_finite(a, "cholesky_psd");
  check_symmetric(a, "cholesky_psd");
  Matrix reg = a;
  reg.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "cholesky_psd: matrix is not positive definite at this jitter; "
        "increase the regularization");
  }
  return llt.matrixL();
}

std::pair<Vector, Matrix> sym_eig(const Matrix& a) {
  check_finite(a, "sym_eig");
  check_symmetric(a, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig: eigendecomposition failed to converge");
  }
  // Eigen returns ascending order; flip to descending.
  const Index n = a.rows();
  Vector values(n);
  Matrix vectors(n, n);
  for (Index i = 0; i < n; ++i) {
    values(i) = solver.eigenvalues()(n - 1 - i);
    vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return {values, vectors};
}

SvdResult truncated_svd(const Matrix& a, Index rank, Index oversample,
                        Index power_iters, Rng& rng) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (rank <= 0 || rank > std::min(m, n)) {
    std::ostringstream msg;
    msg << "truncated_svd: rank " << rank << " invalid for " << m << "x" << n
        << " matrix";
    throw std::invalid_argument(msg.str());
  }
  check_finite(a, "truncated_svd");

  const Index sketch = std::min(std::min(m, n), rank + std::max<Index>(oversample, 0));
  Matrix omega = rng_normal(rng, n, sketch);
  Matrix q = orthonormalize(a * omega);
  for (Index it = 0; it < power_iters; ++it) {
    q = orthonormalize(a.transpose() * q);
    q = orthonormalize(a * q);
  }
  Matrix b = q.transpose() * a;  // sketch x n
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdResult out;
  out.u = (q * svd.matrixU()).leftCols(rank);
  out.s = svd.singularValues().head(rank);
  out.vt = svd.matrixV().leftCols(rank).transpose();
  check_finite(out.u, "truncated_svd result");
  return out;
}

Matrix rng_normal(Rng& rng, Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  return out;
}

}  // namespace daemb
