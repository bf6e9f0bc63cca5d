#include "extrap/hermite.hpp"

#include <algorithm>
#include <cmath>

namespace extrap::hermite {

double hermite_H(int n, double x) {
  if (n < 0) throw InvalidInput("hermite_H: order must be >= 0");
  if (!std::isfinite(x)) throw InvalidInput("hermite_H: x must be finite");
  double prev = 1.0;  // H_0
  if (n == 0) return prev;
  double cur = 2.0 * x;  // H_1
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteBasis::HermiteBasis(int max_order) : max_order_(max_order) {
  if (max_order < 0 || max_order > kMaxOrder) {
    throw OrderTooLarge("HermiteBasis: max_order must be in [0, 200]");
  }
}

std::vector<double> HermiteBasis::psi_all(int n, double x) const {
  if (n > max_order_) {
    throw OrderTooLarge("psi: order exceeds basis max_order");
  }
  if (!std::isfinite(x)) throw InvalidInput("psi: x must be finite");
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  const double psi0 = std::pow(2.0 * M_PI, -0.25) * std::exp(-0.25 * x * x);
  out[0] = psi0;
  if (n == 0) return out;
  out[1] = x * psi0;
  for (int k = 1; k < n; ++k) {
    out[k + 1] = x / std::sqrt(k + 1.0) * out[k] -
                 std::sqrt(k / (k + 1.0)) * out[k - 1];
  }
  return out;
}

double HermiteBasis::psi(int n, double x) const { return psi_all(n, x)[n]; }

double psi(int n, double x) {
  if (n < 0 || n > kMaxOrder) {
    throw OrderTooLarge("psi: order must be in [0, 200]");
  }
  return HermiteBasis(n).psi(n, x);
}

double mehler_closed_form(double rho, double x1, double x2) {
  if (std::abs(rho) >= 1.0) {
    throw DegenerateCorrelation("mehler_closed_form: |rho| must be < 1");
  }
  const double s = 1.0 - rho * rho;
  const double quad = (x1 * x1 + x2 * x2 - 2.0 * rho * x1 * x2) / (2.0 * s);
  return std::exp(-quad + 0.25 * x1 * x1 + 0.25 * x2 * x2) /
         std::sqrt(2.0 * M_PI * s);
}

double mehler_series(double rho, double x1, double x2, int truncation) {
  if (std::abs(rho) >= 1.0) {
    throw DegenerateCorrelation("mehler_series: |rho| must be < 1");
  }
  HermiteBasis basis(truncation);
  const std::vector<double> p1 = basis.psi_all(truncation, x1);
  const std::vector<double> p2 = basis.psi_all(truncation, x2);
  double sum = 0.0;
  double rk = 1.0;
  for (int k = 0; k <= truncation; ++k) {
    sum += rk * p1[k] * p2[k];
    rk *= rho;
  }
  return sum;
}

int mehler_identity_truncation(double rho, int floor_n, double tol) {
  if (std::abs(rho) >= 1.0) {
    throw DegenerateCorrelation("mehler_identity_truncation: |rho| must be < 1");
  }
  if (!(tol > 0.0)) {
    throw InvalidInput("mehler_identity_truncation: tol must be positive");
  }
  const double r = std::abs(rho);
  int n = std::max(floor_n, 0);
  if (r > 0.0) {
    // 0.4 bounds |psi_j(x1) psi_j(x2)| over the real line.
    const double needed =
        std::log(tol * (1.0 - r) / 0.4) / std::log(r) - 1.0;
    if (needed > n) n = static_cast<int>(std::ceil(needed));
  }
  return std::min(n, kMaxOrder);
}

std::vector<double> block_kernel_eigs(const Matrix& sigma12, int truncation) {
  numerics::require_finite(sigma12, "block_kernel_eigs");
  const numerics::Svd decomp = numerics::svd(sigma12);
  const Vector& sv = decomp.singular_values;
  // Admissibility: the assembled block covariance is PSD iff every
  // singular value is at most 1.
  if (sv.size() > 0 && sv(0) > 1.0 + 1e-10) {
    throw NotPositiveDefinite(
        "block_kernel_eigs: sigma_max(Sigma12) exceeds 1");
  }
  std::vector<double> out;
  // Depth-first enumeration of exponent tuples with sum <= truncation.
  const auto recurse = [&](auto&& self, int i, int budget,
                           double prod) -> void {
    if (i == sv.size()) {
      out.push_back(prod);
      return;
    }
    double p = prod;
    for (int n = 0; n <= budget; ++n) {
      self(self, i + 1, budget - n, p);
      p *= sv(i);
    }
  };
  recurse(recurse, 0, truncation, 1.0);
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

}  // namespace extrap::hermite
