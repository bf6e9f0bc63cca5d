#include "extrap/numerics.hpp"

#include <cmath>

namespace extrap::numerics {

void require_finite(const Matrix& a, const char* who) {
  if (!a.allFinite()) {
    throw InvalidInput(std::string(who) + ": non-finite entries");
  }
}

SymMatrix::SymMatrix(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw InvalidInput("SymMatrix: matrix must be square");
  }
  if (a.rows() < 1) {
    throw InvalidInput("SymMatrix: dimension must be positive");
  }
  require_finite(a, "SymMatrix");
  entries_ = 0.5 * (a + a.transpose());
}

Spectrum sym_eig(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries());
  if (solver.info() != Eigen::Success) {
    throw InvalidInput("sym_eig: eigensolver failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Svd svd(const Matrix& a) {
  require_finite(a, "svd");
  Eigen::JacobiSVD<Matrix> solver(a,
                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

namespace {

// Checks PSD-ness with the relative clipping tolerance and returns the
// spectrum. Eigenvalues in [-1e-10*||A||_2, 0) are clipped to 0.
Spectrum psd_spectrum(const SymMatrix& a, const char* who) {
  Spectrum spec = sym_eig(a);
  const double norm2 =
      std::max(std::abs(spec.eigenvalues(0)),
               std::abs(spec.eigenvalues(spec.eigenvalues.size() - 1)));
  const double clip = kNullTol * std::max(norm2, 1.0);
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues(i) < -clip) {
      throw InvalidInput(std::string(who) + ": matrix is not PSD");
    }
    if (spec.eigenvalues(i) < 0.0) spec.eigenvalues(i) = 0.0;
  }
  return spec;
}

}  // namespace

GenMaxEig generalized_max_eig(const SymMatrix& b, const SymMatrix& a,
                              double null_tol) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("generalized_max_eig: dimension mismatch");
  }
  const Spectrum spec_a = psd_spectrum(a, "generalized_max_eig(A)");
  const Spectrum spec_b = psd_spectrum(b, "generalized_max_eig(B)");
  const Eigen::Index d = a.dim();
  const double lmax_a = spec_a.eigenvalues(d - 1);
  const double lmax_b = spec_b.eigenvalues(d - 1);

  // Split eigenvectors of A into null space N and complement R.
  const double null_cut = null_tol * std::max(lmax_a, 0.0);
  Eigen::Index n_null = 0;
  while (n_null < d && spec_a.eigenvalues(n_null) <= null_cut) ++n_null;

  if (n_null > 0) {
    const Matrix null_basis = spec_a.eigenvectors.leftCols(n_null);
    const SymMatrix bn(
        Matrix(null_basis.transpose() * b.entries() * null_basis));
    const Spectrum spec_bn = sym_eig(bn);
    const double bmax = spec_bn.eigenvalues(n_null - 1);
    if (bmax > 1e-8 * std::max(lmax_b, 0.0)) {
      GenMaxEig out;
      out.value = kInf;
      out.witness = null_basis * spec_bn.eigenvectors.col(n_null - 1);
      return out;
    }
  }
  if (n_null == d) {
    // A == 0 and B carries no energy either: 0/0 = 0.
    return {0.0, Vector::Zero(d)};
  }

  // Whiten the pencil on the complement of the null space.
  const Matrix range = spec_a.eigenvectors.rightCols(d - n_null);
  const Vector scale =
      spec_a.eigenvalues.tail(d - n_null).array().sqrt().inverse().matrix();
  // Columns of W map whitened coordinates back to the original space.
  const Matrix white = range * scale.asDiagonal();
  const SymMatrix m(Matrix(white.transpose() * b.entries() * white));
  const Spectrum spec_m = sym_eig(m);
  GenMaxEig out;
  out.value = std::max(spec_m.eigenvalues(d - n_null - 1), 0.0);
  out.witness = white * spec_m.eigenvectors.col(d - n_null - 1);
  const double wn = out.witness.norm();
  if (wn > 0) out.witness /= wn;
  return out;
}

Matrix cholesky(const SymMatrix& a) {
  const Spectrum spec = sym_eig(a);
  if (spec.eigenvalues(0) <= 1e-12) {
    throw NotPositiveDefinite("cholesky: lambda_min <= 1e-12");
  }
  Eigen::LLT<Matrix> llt(a.entries());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: factorization failed");
  }
  return llt.matrixL();
}

Matrix random_orthonormal(Eigen::Index d, std::uint64_t seed) {
  if (d < 1) throw InvalidInput("random_orthonormal: d must be >= 1");
  NormalStream stream(seed);
  const Matrix g = stream.matrix(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the sign ambiguity so the result is Haar-distributed and
  // reproducible.
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

double NormalStream::uniform() {
  // 53-bit mantissa uniform in [0, 1).
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vector NormalStream::vector(Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = next();
  return v;
}

Matrix NormalStream::matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = next();
  }
  return m;
}

}  // namespace extrap::numerics
