#ifndef EXTRAP_LOWERBOUND_HPP
#define EXTRAP_LOWERBOUND_HPP

#include <vector>

#include "extrap/numerics.hpp"

namespace extrap::lowerbound {

using numerics::Matrix;
using numerics::Vector;

struct Neuron {
  double a = 0.0;  // output weight, positive for constructed bumps
  Vector w;        // unit direction
  double b = 0.0;  // bias
};

/// Two-layer ReLU network f(x) = sum_i a_i ReLU(w_i^T x + b_i).
struct BumpNetwork {
  std::vector<Neuron> neurons;

  double eval(const Vector& x) const;
};

/// Single-neuron bump around the unit vector t: w = t, b = -1 + eps^2/2,
/// a = 8/(3 eps^2). On the unit sphere it vanishes whenever
/// ||x - t|| >= eps and is at least 1 whenever ||x - t|| <= eps/2.
BumpNetwork bump(const Vector& t, double eps);

/// Cover of a finite point set: every input point lies within `radius` of
/// some center; centers are a subset of the input points.
struct SphereCover {
  std::vector<Vector> centers;
  double radius = 0.0;
};

/// Greedy farthest-point cover. A minimum cover is not needed for the
/// construction, only the covering property.
SphereCover greedy_cover(const std::vector<Vector>& points, double radius);

struct WitnessReport {
  double max_abs_on_p = 0.0;  // exactly 0 when the separation hypothesis holds
  double min_on_q = 0.0;      // at least the requested scale
  std::size_t num_centers = 0;
};

/// Builds f = scale * sum over an eps/2-cover of Q_points of bump(center, eps)
/// and evaluates it on both sets. Every Q point must be at distance >= eps
/// from every P-support point.
std::pair<BumpNetwork, WitnessReport> build_witness(
    const std::vector<Vector>& p_support, const std::vector<Vector>& q_points,
    double eps, double scale);

}  // namespace extrap::lowerbound

#endif  // EXTRAP_LOWERBOUND_HPP
