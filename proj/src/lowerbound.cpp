#include "extrap/lowerbound.hpp"

#include <cmath>
#include <limits>

namespace extrap::lowerbound {

double BumpNetwork::eval(const Vector& x) const {
  double out = 0.0;
  for (const Neuron& n : neurons) {
    out += n.a * std::max(0.0, n.w.dot(x) + n.b);
  }
  return out;
}

BumpNetwork bump(const Vector& t, double eps) {
  if (std::abs(t.norm() - 1.0) > 1e-12) {
    throw InvalidInput("bump: t must be a unit vector");
  }
  if (!(eps > 0.0 && eps <= 2.0)) {
    throw InvalidInput("bump: eps must be in (0, 2]");
  }
  BumpNetwork net;
  net.neurons.push_back(
      {8.0 / (3.0 * eps * eps), t, -1.0 + 0.5 * eps * eps});
  return net;
}

SphereCover greedy_cover(const std::vector<Vector>& points, double radius) {
  if (points.empty()) {
    throw InvalidInput("greedy_cover: empty point set");
  }
  SphereCover cover;
  cover.radius = radius;
  std::vector<double> dist(points.size(),
                           std::numeric_limits<double>::infinity());
  std::size_t next = 0;  // farthest-point choice, starts at the first point
  while (true) {
    const Vector& c = points[next];
    cover.centers.push_back(c);
    double worst = 0.0;
    std::size_t worst_idx = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      dist[i] = std::min(dist[i], (points[i] - c).norm());
      if (dist[i] > worst) {
        worst = dist[i];
        worst_idx = i;
      }
    }
    if (worst <= radius) break;
    next = worst_idx;
  }
  return cover;
}

std::pair<BumpNetwork, WitnessReport> build_witness(
    const std::vector<Vector>& p_support, const std::vector<Vector>& q_points,
    double eps, double scale) {
  if (q_points.empty()) {
    throw InvalidInput("build_witness: empty Q point set");
  }
  for (const Vector& q : q_points) {
    for (const Vector& p : p_support) {
      if ((q - p).norm() < eps) {
        throw SeparationViolated(
            "build_witness: a Q point is within eps of the P support");
      }
    }
  }
  const SphereCover cover = greedy_cover(q_points, 0.5 * eps);
  BumpNetwork net;
  for (const Vector& c : cover.centers) {
    BumpNetwork b = bump(c, eps);
    b.neurons[0].a *= scale;
    net.neurons.push_back(b.neurons[0]);
  }
  WitnessReport rep;
  rep.num_centers = cover.centers.size();
  for (const Vector& p : p_support) {
    rep.max_abs_on_p = std::max(rep.max_abs_on_p, std::abs(net.eval(p)));
  }
  rep.min_on_q = std::numeric_limits<double>::infinity();
  for (const Vector& q : q_points) {
    rep.min_on_q = std::min(rep.min_on_q, net.eval(q));
  }
  return {net, rep};
}

}  // namespace extrap::lowerbound
