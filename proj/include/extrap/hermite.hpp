#ifndef EXTRAP_HERMITE_HPP
#define EXTRAP_HERMITE_HPP

#include <vector>

#include "extrap/numerics.hpp"

namespace extrap::hermite {

using numerics::Matrix;
using numerics::Vector;

/// Hard cap on basis orders. The normalized psi recurrence stays bounded at
/// any order (unlike the raw H_n recurrence, which overflows near order 120
/// at |x| = 6); the cap guards against runaway truncation requests.
inline constexpr int kMaxOrder = 200;

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence
/// H_{n+1}(x) = 2x H_n(x) - 2n H_{n-1}(x).
double hermite_H(int n, double x);

/// Orthonormal L^2(R) basis function
///   psi_n(x) = H_n(x/sqrt(2)) exp(-x^2/4) (2pi)^{-1/4} (2^n n!)^{-1/2},
/// evaluated by the normalized recurrence
///   psi_{n+1} = x/sqrt(n+1) psi_n - sqrt(n/(n+1)) psi_{n-1},
/// which never forms the overflowing H_n and factorial separately.
class HermiteBasis {
 public:
  explicit HermiteBasis(int max_order);

  int max_order() const { return max_order_; }

  double psi(int n, double x) const;

  /// psi_0(x) .. psi_n(x) in one sweep of the recurrence.
  std::vector<double> psi_all(int n, double x) const;

 private:
  int max_order_;
};

/// Convenience wrapper over a throwaway basis.
double psi(int n, double x);

/// Closed-form correlation-rho kernel P(x1,x2)/sqrt(P(x1)P(x2)) for a
/// standard bivariate Gaussian:
///   (2pi(1-rho^2))^{-1/2} exp(-(x1^2+x2^2-2 rho x1 x2)/(2(1-rho^2))
///                              + x1^2/4 + x2^2/4).
double mehler_closed_form(double rho, double x1, double x2);

/// Truncated eigenseries sum_{k=0}^{N} rho^k psi_k(x1) psi_k(x2).
double mehler_series(double rho, double x1, double x2, int truncation);

/// Smallest truncation at which the eigenseries tail bound
/// |rho|^{N+1}/(1 - |rho|) * 0.4 falls below tol; never below floor_n,
/// capped at kMaxOrder. The tail is geometric, so for |rho| near 1 the
/// requested floor alone cannot certify small identity errors.
int mehler_identity_truncation(double rho, int floor_n, double tol);

/// Singular values of the multi-dimensional Gaussian kernel with cross
/// block Sigma12: the multiset { prod_i sigma_i^{n_i} : n_i >= 0,
/// sum n_i <= N } over the singular values sigma_i of Sigma12, sorted
/// descending. The leading entry is always 1 (all exponents zero).
std::vector<double> block_kernel_eigs(const Matrix& sigma12, int truncation);

}  // namespace extrap::hermite

#endif  // EXTRAP_HERMITE_HPP
