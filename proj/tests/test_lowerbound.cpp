#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "extrap/lowerbound.hpp"

using namespace extrap;
using numerics::Vector;

namespace {

Vector unit(std::initializer_list<double> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) v(i++) = e;
  return v / v.norm();
}

Vector random_unit(Eigen::Index d, numerics::NormalStream& stream) {
  const Vector v = stream.vector(d);
  return v / v.norm();
}

/// Unit vector at exact chord distance `dist` from t.
Vector at_distance(const Vector& t, double dist,
                   numerics::NormalStream& stream) {
  Vector perp = stream.vector(t.size());
  perp -= perp.dot(t) * t;
  perp.normalize();
  const double cos_angle = 1.0 - dist * dist / 2.0;
  const double sin_angle = std::sqrt(1.0 - cos_angle * cos_angle);
  return cos_angle * t + sin_angle * perp;
}

}  // namespace

TEST_CASE("single bump values at the center and far away") {
  const Vector t = unit({0.0, 0.0, 1.0});
  const auto net = lowerbound::bump(t, 0.5);
  CHECK(net.eval(t) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  numerics::NormalStream stream(2);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector x = random_unit(3, stream);
    if (x.dot(t) <= 1.0 - 0.5 * 0.5 * 0.5) CHECK(net.eval(x) == 0.0);
  }

  for (int rep = 0; rep < 20; ++rep) {
    const Vector x = at_distance(t, 0.25, stream);
    CHECK(net.eval(x) >= 1.0 - 1e-9);
  }
}

TEST_CASE("bump construction validates its inputs") {
  CHECK_THROWS_AS(lowerbound::bump(Vector::Constant(3, 1.0), 0.5),
                  InvalidInput);
  CHECK_THROWS_AS(lowerbound::bump(unit({1.0, 0.0}), 0.0), InvalidInput);
  CHECK_THROWS_AS(lowerbound::bump(unit({1.0, 0.0}), 2.5), InvalidInput);
}

TEST_CASE("bump support dichotomy on random points") {
  numerics::NormalStream stream(3);
  for (int rep = 0; rep < 10000; ++rep) {
    const Vector t = random_unit(4, stream);
    const double eps = 0.1 + 1.8 * stream.uniform();
    const auto net = lowerbound::bump(t, eps);
    const Vector x = random_unit(4, stream);
    const double dist = (x - t).norm();
    if (net.eval(x) > 0.0) CHECK(dist < eps);
    if (dist <= eps / 2.0) CHECK(net.eval(x) >= 1.0 - 1e-9);
    CHECK(net.eval(x) >= 0.0);
  }
}

TEST_CASE("greedy covering") {
  numerics::NormalStream stream(5);
  const Vector single = random_unit(3, stream);
  const auto one = lowerbound::greedy_cover({single}, 0.2);
  CHECK(one.centers.size() == 1);

  const Vector north = unit({0.0, 0.0, 1.0});
  const auto two = lowerbound::greedy_cover({north, -north}, 0.1);
  CHECK(two.centers.size() == 2);

  std::vector<Vector> cloud;
  for (int i = 0; i < 500; ++i) cloud.push_back(random_unit(3, stream));
  const auto cover = lowerbound::greedy_cover(cloud, 0.3);
  for (const Vector& p : cloud) {
    double best = 10.0;
    for (const Vector& c : cover.centers) {
      best = std::min(best, (p - c).norm());
    }
    CHECK(best <= 0.3);
  }

  CHECK_THROWS_AS(lowerbound::greedy_cover({}, 0.3), InvalidInput);
}

TEST_CASE("witness vanishes on the source support and is large on the target") {
  numerics::NormalStream stream(7);
  // Source points on an equatorial band, target at the north pole.
  // Height capped at 0.3 keeps every band point at chord distance > 1 from
  // the pole, comfortably past eps.
  std::vector<Vector> p_support;
  for (int i = 0; i < 200; ++i) {
    const double z = 0.6 * (stream.uniform() - 0.5);
    const double theta = 2.0 * M_PI * stream.uniform();
    Vector v(3);
    v << std::sqrt(1.0 - z * z) * std::cos(theta),
        std::sqrt(1.0 - z * z) * std::sin(theta), z;
    p_support.push_back(v);
  }
  const std::vector<Vector> q_points = {unit({0.0, 0.0, 1.0})};

  const auto [net, report] =
      lowerbound::build_witness(p_support, q_points, 0.5, 10.0);
  CHECK(report.max_abs_on_p == 0.0);
  CHECK(report.min_on_q >= 10.0);
  CHECK(net.eval(q_points[0]) >= 10.0);

  // Doubling the scale doubles every evaluation exactly.
  const auto [net2, report2] =
      lowerbound::build_witness(p_support, q_points, 0.5, 20.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector x = random_unit(3, stream);
    CHECK(net2.eval(x) == doctest::Approx(2.0 * net.eval(x)).epsilon(1e-14));
  }
  CHECK(report2.min_on_q >= 2.0 * report.min_on_q - 1e-9);
  CHECK(report2.max_abs_on_p == 0.0);
}

TEST_CASE("witness construction validates separation and nonempty targets") {
  numerics::NormalStream stream(9);
  const Vector close = unit({0.05, 0.0, 1.0});
  CHECK_THROWS_AS(
      lowerbound::build_witness({unit({0.0, 0.0, 1.0})}, {close}, 0.5, 1.0),
      SeparationViolated);
  CHECK_THROWS_AS(
      lowerbound::build_witness({unit({0.0, 0.0, 1.0})}, {}, 0.5, 1.0),
      InvalidInput);
}
