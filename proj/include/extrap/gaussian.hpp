#ifndef EXTRAP_GAUSSIAN_HPP
#define EXTRAP_GAUSSIAN_HPP

#include <functional>
#include <optional>

#include "extrap/numerics.hpp"

namespace extrap::gaussian {

using numerics::Matrix;
using numerics::SymMatrix;
using numerics::Vector;
using numerics::kInf;

/// Pairwise-Gaussian model: correlation matrix with unit diagonal plus the
/// per-feature means and standard deviations. The means/stds never change
/// any restricted-error-ratio quantity (invertible per-feature reparam),
/// they are carried so specs can be loaded and echoed verbatim.
class CorrelationSpec {
 public:
  CorrelationSpec(const Matrix& sigma, Vector means, Vector stds);

  /// Standard spec: zero means, unit stds.
  explicit CorrelationSpec(const Matrix& sigma);

  Eigen::Index dim() const { return sigma_.dim(); }
  const SymMatrix& sigma() const { return sigma_; }
  const Vector& means() const { return means_; }
  const Vector& stds() const { return stds_; }

 private:
  SymMatrix sigma_;
  Vector means_;
  Vector stds_;
};

/// Two-block Gaussian with identity marginal blocks and cross covariance
/// Sigma12; admissible iff sigma_max(Sigma12) <= 1.
class BlockGaussianSpec {
 public:
  explicit BlockGaussianSpec(const Matrix& sigma12);

  Eigen::Index d1() const { return sigma12_.rows(); }
  Eigen::Index d2() const { return sigma12_.cols(); }
  const Matrix& sigma12() const { return sigma12_; }

  /// Assembled (d1+d2) x (d1+d2) covariance [[I, S],[S^T, I]].
  SymMatrix block_matrix() const;

 private:
  Matrix sigma12_;
};

/// Additive function in the Hermite basis: coefficient alpha(i, n) is the
/// level-n coefficient of feature i, so that
/// g_i(x) sqrt(phi(x)) = sum_n alpha(i, n) psi_n(x).
struct HermiteAdditiveFunction {
  Matrix alpha;  // d rows, N+1 columns

  Eigen::Index dim() const { return alpha.rows(); }
  int max_level() const { return static_cast<int>(alpha.cols()) - 1; }

  /// g_i evaluated at x (the sqrt-density factor divided back out).
  double eval_feature(Eigen::Index i, double x) const;

  /// sum_i g_i(x_i).
  double eval(const Vector& x) const;
};

/// tau <= d / lambda_min(Sigma_P); +infinity when lambda_min <= 1e-12.
double rer_bound_pairwise(const CorrelationSpec& p);

struct TwoBlockBound {
  double bound = 0.0;          // 2 / (1 - sigma_max), or +infinity
  double sigma_max = 0.0;      // largest singular value of Sigma12
  double lambda_min_block = 0.0;  // lambda_min of the assembled covariance
};

/// tau <= 2 / (1 - sigma_max(Sigma12)); also reports lambda_min of the
/// assembled block matrix, which equals 1 - sigma_max.
TwoBlockBound rer_bound_two_block(const BlockGaussianSpec& b);

struct KappaResult {
  double kappa = 1.0;
  int argmax_level = 0;     // level attaining the supremum (0 means n=0 term)
  int levels_evaluated = 0;  // highest level actually computed
  bool truncated_early = false;
  /// Upper bound on any remaining tail levels when the off-diagonals decayed
  /// below 1e-12 before the requested truncation; absent otherwise.
  std::optional<double> tail_bound;
};

/// Exact restricted error ratio under the standard pairwise-Gaussian model:
/// max(1, max_{1 <= n <= N} sup_v v^T Sigma_Q^{@n} v / v^T Sigma_P^{@n} v)
/// with @n the elementwise power. Stops early once both elementwise powers
/// are numerically diagonal and reports a certificate for the tail.
KappaResult exact_kappa(const CorrelationSpec& p, const CorrelationSpec& q,
                        int truncation);

/// E[(sum_i g_i)^2] = sum_n alpha^(n)T Sigma^{@n} alpha^(n) for an additive
/// function in the Hermite basis under correlation Sigma.
double additive_norm_sq(const HermiteAdditiveFunction& f, const SymMatrix& sigma);

/// Streaming sampler for N(mean, Sigma): mean + L z with Box-Muller normals
/// from a seeded generator. Single consumer; independent instances with
/// distinct seeds may run in parallel.
class GaussianSampler {
 public:
  GaussianSampler(const SymMatrix& sigma, Vector mean, std::uint64_t seed);

  Vector next();
  /// d x n matrix of samples, one per column.
  Matrix batch(Eigen::Index n);

  Eigen::Index dim() const { return mean_.size(); }

 private:
  Matrix factor_;  // L with L L^T = Sigma
  Vector mean_;
  numerics::NormalStream stream_;
};

struct McRatio {
  double ratio = 0.0;
  double stderr_ = 0.0;
  double mean_q = 0.0;
  double mean_p = 0.0;
};

/// Monte Carlo estimate of E_Q[f^2] / E_P[f^2] with delta-method standard
/// error; f is the full-input function (typically f1 + f2 over blocks).
McRatio mc_ratio_estimate(const std::function<double(const Vector&)>& f,
                          GaussianSampler& p_sampler,
                          GaussianSampler& q_sampler, Eigen::Index n_samples);

/// Same estimator from already-evaluated f values on P and Q samples.
McRatio mc_ratio_from_values(const Vector& f_p, const Vector& f_q);

struct Lemma3Report {
  bool holds = false;
  double min_margin = 0.0;  // min over k of lambda_min(S^{@k}) - lambda_min(S)
};

/// lambda_min(Sigma^{@k}) >= lambda_min(Sigma) for k in [1, k_max].
Lemma3Report lemma3_check(const SymMatrix& sigma, int k_max);

/// sigma_max(Sigma12) <= 1 for any admissible cross block.
bool lemma4_check(const Matrix& sigma12);

struct Lemma5Report {
  double sigma_max = 0.0;
  double lambda_min_block = 0.0;
  bool holds = false;  // |lambda_min - (1 - sigma_max)| <= 1e-9
};

Lemma5Report lemma5_check(const Matrix& sigma12);

/// Random admissible cross block gamma * U1 diag(s) U2^T with s uniform in
/// [0, s_max]; always admissible (sigma_max <= 1) for gamma, s_max <= 1.
Matrix random_admissible_cross_block(Eigen::Index d1, Eigen::Index d2,
                                     double gamma, double s_max,
                                     std::uint64_t seed);

}  // namespace extrap::gaussian

#endif  // EXTRAP_GAUSSIAN_HPP
