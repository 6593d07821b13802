#ifndef DAEMB_NUMERICS_HPP
#define DAEMB_NUMERICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <utility>

namespace daemb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Seeded random source. Identical seed yields an identical stream, so every
/// randomized computation in the pipeline is reproducible run to run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Standard normal via Box-Muller; the spare deviate is cached.
  double normal();

  /// Derive an independent stream for a sub-task without disturbing this one.
  Rng fork(std::uint64_t salt) {
    return Rng(gen_() ^ (salt * 0x9e3779b97f4a7c15ull));
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

void check_finite(const Matrix& a, const char* what);

/// a * b with dimension and finiteness checks.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Lower-triangular L with L*L^T = a + jitter*I. Input must be symmetric.
/// Throws if the matrix is not positive definite after jitter.
Matrix cholesky_psd(const Matrix& a, double jitter);

/// Eigendecomposition of a symmetric matrix. Eigenvalues are returned in
/// descending order with matching orthonormal eigenvector columns.
std::pair<Vector, Matrix> sym_eig(const Matrix& a);

struct SvdResult {
  Matrix u;   // rows x rank
  Vector s;   // rank, non-negative, non-increasing
  Matrix vt;  // rank x cols
};

/// Randomized truncated SVD (range finder + power iterations). Deterministic
/// for a fixed rng state. For inputs of exact rank <= rank the factorization
/// is accurate to roundoff.
SvdResult truncated_svd(const Matrix& a, Index rank, Index oversample,
                        Index power_iters, Rng& rng);

/// Matrix of i.i.d. standard normal entries drawn from rng.
Matrix rng_normal(Rng& rng, Index rows, Index cols);

}  // namespace daemb

#endif
