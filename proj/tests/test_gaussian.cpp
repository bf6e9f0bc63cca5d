#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "extrap/gaussian.hpp"
#include "extrap/hermite.hpp"

using namespace extrap;
using gaussian::BlockGaussianSpec;
using gaussian::CorrelationSpec;
using numerics::Matrix;
using numerics::SymMatrix;
using numerics::Vector;

namespace {

Matrix corr2(double rho) {
  Matrix s(2, 2);
  s << 1.0, rho, rho, 1.0;
  return s;
}

/// Random correlation matrix: normalized Gram matrix of a random square
/// factor plus a ridge keeping lambda_min away from zero.
Matrix random_correlation(Eigen::Index d, numerics::NormalStream& stream,
                          double ridge = 0.1) {
  const Matrix a = stream.matrix(d, d);
  Matrix s = a * a.transpose() + ridge * Matrix::Identity(d, d);
  const Vector inv_sqrt = s.diagonal().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal();
}

}  // namespace

TEST_CASE("correlation spec validation") {
  CHECK_NOTHROW(CorrelationSpec(corr2(0.5)));
  CHECK_THROWS_AS(CorrelationSpec(corr2(1.2)), InvalidInput);
  Matrix bad_diag(2, 2);
  bad_diag << 2.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS((void)CorrelationSpec(bad_diag), InvalidInput);
  CHECK_THROWS_AS(
      CorrelationSpec(corr2(0.5), Vector::Zero(2),
                      Vector::Constant(2, -1.0)),
      InvalidInput);
}

TEST_CASE("pairwise bound") {
  CHECK(gaussian::rer_bound_pairwise(CorrelationSpec(Matrix::Identity(3, 3))) ==
        doctest::Approx(3.0));
  for (double rho : {0.3, -0.6, 0.9}) {
    CHECK(gaussian::rer_bound_pairwise(CorrelationSpec(corr2(rho))) ==
          doctest::Approx(2.0 / (1.0 - std::abs(rho))).epsilon(1e-12));
  }
  // Means and stds never move the bound (invertible per-feature reparam).
  Vector means(2);
  means << 5.0, -2.0;
  Vector stds(2);
  stds << 3.0, 0.1;
  const double plain = gaussian::rer_bound_pairwise(CorrelationSpec(corr2(0.4)));
  const double moved =
      gaussian::rer_bound_pairwise(CorrelationSpec(corr2(0.4), means, stds));
  CHECK(plain == moved);
}

TEST_CASE("two-block bound") {
  CHECK(gaussian::rer_bound_two_block(BlockGaussianSpec(Matrix::Zero(3, 3)))
            .bound == doctest::Approx(2.0));

  const Matrix o = numerics::random_orthonormal(4, 77);
  const auto scaled = gaussian::rer_bound_two_block(
      BlockGaussianSpec(Matrix(0.9 * o)));
  CHECK(scaled.bound == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(scaled.sigma_max == doctest::Approx(0.9).epsilon(1e-12));

  numerics::NormalStream stream(12);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix cross = gaussian::random_admissible_cross_block(
        3, 5, 0.9, 0.95, 100 + static_cast<std::uint64_t>(rep));
    const BlockGaussianSpec spec(cross);
    const auto b = gaussian::rer_bound_two_block(spec);
    const double lambda_min =
        numerics::sym_eig(spec.block_matrix()).eigenvalues(0);
    CHECK(b.bound == doctest::Approx(2.0 / lambda_min).epsilon(1e-9));
  }
}

TEST_CASE("two-block bound is rotation invariant") {
  const Matrix cross =
      gaussian::random_admissible_cross_block(4, 4, 0.8, 0.9, 5);
  const double base = gaussian::rer_bound_two_block(BlockGaussianSpec(cross)).bound;
  const Matrix u = numerics::random_orthonormal(4, 6);
  const Matrix v = numerics::random_orthonormal(4, 7);
  const double rotated =
      gaussian::rer_bound_two_block(
          BlockGaussianSpec(Matrix(u.transpose() * cross * v)))
          .bound;
  CHECK(rotated == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("exact ratio for pairwise-Gaussian pairs") {
  const CorrelationSpec p(Matrix::Identity(2, 2));
  CHECK(gaussian::exact_kappa(p, p, 40).kappa == doctest::Approx(1.0));

  const CorrelationSpec q(corr2(0.8));
  const auto k = gaussian::exact_kappa(p, q, 40);
  CHECK(k.kappa == doctest::Approx(1.8).epsilon(1e-9));
  CHECK(k.argmax_level == 1);

  CHECK_THROWS_AS(
      gaussian::exact_kappa(p, CorrelationSpec(Matrix::Identity(3, 3)), 40),
      ShapeMismatch);
}

TEST_CASE("exact ratio restricted to the first level matches the plain pencil") {
  numerics::NormalStream stream(19);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix sp = random_correlation(3, stream);
    const Matrix sq = random_correlation(3, stream);
    const double level1 =
        numerics::generalized_max_eig(SymMatrix(sq), SymMatrix(sp)).value;
    const auto k = gaussian::exact_kappa(CorrelationSpec(sp),
                                         CorrelationSpec(sq), 1);
    CHECK(k.kappa == doctest::Approx(std::max(1.0, level1)).epsilon(1e-9));
  }
}

TEST_CASE("exact ratio never exceeds the pairwise bound") {
  numerics::NormalStream stream(23);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index d = 2 + rep % 3;
    const CorrelationSpec p(random_correlation(d, stream));
    const CorrelationSpec q(random_correlation(d, stream));
    const double bound = gaussian::rer_bound_pairwise(p);
    const auto k = gaussian::exact_kappa(p, q, 40);
    CHECK(k.kappa <= bound + 1e-8);
    if (k.truncated_early) {
      REQUIRE(k.tail_bound.has_value());
      CHECK(*k.tail_bound <= bound + 1e-8);
    }
  }
}

TEST_CASE("additive norms in the Hermite basis") {
  gaussian::HermiteAdditiveFunction zero{Matrix::Zero(2, 4)};
  CHECK(gaussian::additive_norm_sq(zero, SymMatrix::identity(2)) == 0.0);

  gaussian::HermiteAdditiveFunction level1{Matrix::Zero(2, 3)};
  level1.alpha(0, 1) = 1.0;
  CHECK(gaussian::additive_norm_sq(level1, SymMatrix::identity(2)) ==
        doctest::Approx(1.0));
}

TEST_CASE("additive norm matches Monte Carlo on a correlated pair") {
  numerics::NormalStream stream(29);
  const Matrix sigma = corr2(0.6);
  gaussian::HermiteAdditiveFunction f{0.5 * stream.matrix(2, 4)};
  const double predicted = gaussian::additive_norm_sq(f, SymMatrix(sigma));

  gaussian::GaussianSampler sampler(SymMatrix(sigma), Vector::Zero(2), 31);
  const Eigen::Index n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = f.eval(sampler.next());
    sum += v * v;
    sumsq += v * v * v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(predicted - mean) <= 3.0 * se);
}

TEST_CASE("sampler covariance and determinism") {
  const Matrix sigma = corr2(0.7);
  gaussian::GaussianSampler a(SymMatrix(sigma), Vector::Zero(2), 41);
  gaussian::GaussianSampler b(SymMatrix(sigma), Vector::Zero(2), 41);
  const Matrix batch_a = a.batch(100000);
  CHECK((batch_a - b.batch(100000)).norm() == 0.0);

  const Vector mean = batch_a.rowwise().mean();
  CHECK(mean.norm() < 0.02);
  const Matrix centered = batch_a.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / 100000.0;
  CHECK((cov - sigma).norm() <= 0.05 * sigma.norm());
}

TEST_CASE("Monte Carlo ratio estimation") {
  const SymMatrix eye = SymMatrix::identity(2);
  gaussian::GaussianSampler p(eye, Vector::Zero(2), 1);
  gaussian::GaussianSampler q(eye, Vector::Zero(2), 2);
  const auto flat = gaussian::mc_ratio_estimate(
      [](const Vector&) { return 1.0; }, p, q, 5000);
  CHECK(flat.ratio == doctest::Approx(1.0));
  CHECK(flat.stderr_ == doctest::Approx(0.0));

  gaussian::GaussianSampler p2(eye, Vector::Zero(2), 3);
  gaussian::GaussianSampler q2(eye, Vector::Zero(2), 4);
  const auto same = gaussian::mc_ratio_estimate(
      [](const Vector& x) { return x(0) + 0.5 * x(1) * x(1); }, p2, q2,
      100000);
  CHECK(std::abs(same.ratio - 1.0) <= 3.0 * same.stderr_);

  gaussian::GaussianSampler p3(eye, Vector::Zero(2), 5);
  gaussian::GaussianSampler q3(eye, Vector::Zero(2), 6);
  CHECK_THROWS_AS(gaussian::mc_ratio_estimate(
                      [](const Vector&) { return 0.0; }, p3, q3, 1000),
                  DegenerateDenominator);
}

TEST_CASE("elementwise power and block matrix eigenvalue checks") {
  numerics::NormalStream stream(37);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index d = 2 + (rep % 3) * 3;
    const auto l3 = gaussian::lemma3_check(
        SymMatrix(random_correlation(d, stream)), 6);
    CHECK(l3.holds);
    CHECK(l3.min_margin >= -1e-10);
  }
  CHECK(gaussian::lemma3_check(SymMatrix::identity(4), 6).holds);

  // d=2, rho=0.9: lambda_min of the k-th elementwise power is 1 - 0.9^k.
  const auto l3_pair = gaussian::lemma3_check(SymMatrix(corr2(0.9)), 2);
  CHECK(l3_pair.holds);

  for (int rep = 0; rep < 10; ++rep) {
    const Matrix cross = gaussian::random_admissible_cross_block(
        4, 3, 0.95, 0.95, 200 + static_cast<std::uint64_t>(rep));
    CHECK(gaussian::lemma4_check(cross));
    const auto l5 = gaussian::lemma5_check(cross);
    CHECK(l5.holds);
    CHECK(std::abs(l5.lambda_min_block - (1.0 - l5.sigma_max)) <= 1e-9);
  }

  Matrix d09 = Matrix::Zero(2, 2);
  d09(0, 0) = 0.9;
  d09(1, 1) = 0.9;
  const auto fixed = gaussian::lemma5_check(d09);
  CHECK(fixed.lambda_min_block == doctest::Approx(0.1).epsilon(1e-9));

  const auto empty = gaussian::lemma5_check(Matrix::Zero(2, 3));
  CHECK(empty.sigma_max == doctest::Approx(0.0));
  CHECK(empty.lambda_min_block == doctest::Approx(1.0));
}

TEST_CASE("random admissible cross blocks stay admissible") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix cross =
        gaussian::random_admissible_cross_block(5, 4, 0.9, 0.95, seed);
    CHECK(numerics::svd(cross).singular_values(0) <= 0.9 * 0.95 + 1e-12);
  }
}
