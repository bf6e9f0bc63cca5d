#ifndef EXTRAP_NUMERICS_HPP
#define EXTRAP_NUMERICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <random>

#include "extrap/errors.hpp"

namespace extrap::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative tolerance below which an eigenvalue of a PSD matrix counts as
/// part of the null space.
inline constexpr double kNullTol = 1e-10;

/// Symmetric matrix with the symmetry enforced on construction: the stored
/// entries are (A + A^T)/2, so entries(i,j) == entries(j,i) exactly.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& a);

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const {
    return entries_(i, j);
  }

  static SymMatrix identity(Eigen::Index d) {
    return SymMatrix(Matrix::Identity(d, d));
  }

 private:
  Matrix entries_;
};

/// Full symmetric eigendecomposition. Eigenvalues ascending, eigenvectors
/// orthonormal columns in matching order.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
};

Spectrum sym_eig(const SymMatrix& a);

struct Svd {
  Matrix u;
  Vector singular_values;  // descending, nonnegative
  Matrix v;
};

Svd svd(const Matrix& a);

/// Result of the generalized maximum eigenvalue problem
/// sup_v v^T B v / v^T A v over PSD pencils, extended-real valued.
/// When the value is finite, `witness` attains the supremum; when infinite,
/// `witness` is a null direction of A with positive B-energy.
struct GenMaxEig {
  double value = 0.0;
  Vector witness;
};

/// sup_v v^T B v / v^T A v with 0/0 = 0. Directions in the null space of A
/// (eigenvalues <= null_tol * lambda_max(A)) that carry B-energy above
/// 1e-8 * lambda_max(B) yield +infinity; the shared null space is dropped
/// and the remainder is solved by Cholesky whitening.
GenMaxEig generalized_max_eig(const SymMatrix& b, const SymMatrix& a,
                              double null_tol = kNullTol);

/// Lower-triangular factor L with L L^T = A. Requires lambda_min(A) > 1e-12.
Matrix cholesky(const SymMatrix& a);

/// Haar-distributed orthonormal d x d matrix, deterministic per seed.
/// QR of a standard normal matrix with the R diagonal sign fixed.
Matrix random_orthonormal(Eigen::Index d, std::uint64_t seed);

/// Deterministic standard normal stream (Box-Muller over mt19937_64), shared
/// by every randomized component so results do not depend on the C++
/// standard library's distribution implementations.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double next();
  Vector vector(Eigen::Index d);
  Matrix matrix(Eigen::Index rows, Eigen::Index cols);

  /// Uniform in [0, 1).
  double uniform();

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Throws InvalidInput if any entry is non-finite.
void require_finite(const Matrix& a, const char* who);

}  // namespace extrap::numerics

#endif  // EXTRAP_NUMERICS_HPP
