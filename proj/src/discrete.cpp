#include "extrap/discrete.hpp"

#include <cmath>
#include <deque>
#include <numeric>

namespace extrap::discrete {

namespace {

constexpr double kMassSumTol = 1e-12;
constexpr double kEdgeTol = 1e-15;
// Eigenvalues of the normalized kernel at or below this count as zero for
// the infinity classification; Kbar has lambda_max <= k, so this is an
// absolute threshold on an O(1) spectrum.
constexpr double kLambdaZeroTol = 1e-8;

void require_same_shape(const DiscreteJoint& p, const DiscreteJoint& q) {
  if (p.arities() != q.arities()) {
    throw ShapeMismatch("discrete: joints have different arities");
  }
}

// Iterates all cells of the product space, calling fn(idx, flat_index).
template <typename Fn>
void for_each_cell(const std::vector<int>& arities, Fn&& fn) {
  const int k = static_cast<int>(arities.size());
  std::vector<int> idx(k, 0);
  std::size_t flat = 0;
  while (true) {
    fn(idx, flat);
    ++flat;
    int i = k - 1;
    while (i >= 0) {
      if (++idx[i] < arities[i]) break;
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::vector<int> arities,
                             std::vector<double> table)
    : arities_(std::move(arities)), table_(std::move(table)) {
  const int k = static_cast<int>(arities_.size());
  if (k < 2 || k > 5) {
    throw InvalidInput("DiscreteJoint: number of features must be in [2,5]");
  }
  std::size_t cells = 1;
  for (int r : arities_) {
    if (r < 1 || r > 12) {
      throw InvalidInput("DiscreteJoint: arities must be in [1,12]");
    }
    cells *= static_cast<std::size_t>(r);
  }
  if (table_.size() != cells) {
    throw ShapeMismatch("DiscreteJoint: table size does not match arities");
  }
  double sum = 0.0;
  for (double m : table_) {
    if (!std::isfinite(m) || m < 0.0) {
      throw InvalidInput("DiscreteJoint: masses must be finite and >= 0");
    }
    sum += m;
  }
  if (std::abs(sum - 1.0) > kMassSumTol) {
    throw InvalidInput("DiscreteJoint: masses must sum to 1 within 1e-12");
  }
  strides_.assign(k, 1);
  for (int i = k - 2; i >= 0; --i) {
    strides_[i] = strides_[i + 1] * arities_[i + 1];
  }
}

double DiscreteJoint::mass(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int i = 0; i < num_features(); ++i) {
    flat += static_cast<std::size_t>(idx[i]) * strides_[i];
  }
  return table_[flat];
}

Vector DiscreteJoint::marginal(int i) const {
  Vector m = Vector::Zero(arities_[i]);
  for_each_cell(arities_, [&](const std::vector<int>& idx, std::size_t flat) {
    m(idx[i]) += table_[flat];
  });
  return m;
}

Matrix DiscreteJoint::pairwise(int i, int j) const {
  if (i == j) {
    return marginal(i).asDiagonal();
  }
  Matrix m = Matrix::Zero(arities_[i], arities_[j]);
  for_each_cell(arities_, [&](const std::vector<int>& idx, std::size_t flat) {
    m(idx[i], idx[j]) += table_[flat];
  });
  return m;
}

int DiscreteJoint::total_dim() const {
  return std::accumulate(arities_.begin(), arities_.end(), 0);
}

int DiscreteJoint::block_offset(int i) const {
  return std::accumulate(arities_.begin(), arities_.begin() + i, 0);
}

KernelMatrix build_kernel(const DiscreteJoint& joint) {
  const int k = joint.num_features();
  const int r = joint.total_dim();
  Matrix kmat = Matrix::Zero(r, r);
  std::vector<int> offsets(k + 1, 0);
  for (int i = 0; i < k; ++i) {
    offsets[i + 1] = offsets[i] + joint.arities()[i];
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      kmat.block(offsets[i], offsets[j], joint.arities()[i],
                 joint.arities()[j]) = joint.pairwise(i, j);
    }
  }
  Vector diag(r);
  for (int i = 0; i < k; ++i) {
    diag.segment(offsets[i], joint.arities()[i]) = joint.marginal(i);
  }
  // Pseudo-inverse of D^{1/2}: zero-mass coordinates get zero rows/columns.
  Vector dinv(r);
  for (int t = 0; t < r; ++t) {
    dinv(t) = diag(t) > 0.0 ? 1.0 / std::sqrt(diag(t)) : 0.0;
  }
  const Matrix kbar = dinv.asDiagonal() * kmat * dinv.asDiagonal();

  KernelMatrix out{r, offsets, SymMatrix(kmat), SymMatrix(kbar), diag};
  return out;
}

double marginal_ratio_max(const DiscreteJoint& p, const DiscreteJoint& q) {
  require_same_shape(p, q);
  double best = 0.0;
  for (int i = 0; i < p.num_features(); ++i) {
    const Vector mp = p.marginal(i);
    const Vector mq = q.marginal(i);
    for (int t = 0; t < mp.size(); ++t) {
      double ratio;
      if (mp(t) > 0.0) {
        ratio = mq(t) / mp(t);
      } else {
        ratio = mq(t) > 0.0 ? kInf : 0.0;
      }
      best = std::max(best, ratio);
    }
  }
  return best;
}

double rer_upper_bound_discrete(const DiscreteJoint& p,
                                const DiscreteJoint& q) {
  require_same_shape(p, q);
  const int k = p.num_features();
  const double ratio = marginal_ratio_max(p, q);
  if (std::isinf(ratio)) return kInf;
  const KernelMatrix kp = build_kernel(p);
  // Zero-mass coordinates are padding from the pseudo-inverse completion,
  // not degrees of freedom; the spectrum that governs the bound lives on the
  // positive-mass restriction of Kbar.
  std::vector<int> active;
  for (int i = 0; i < kp.r; ++i) {
    if (kp.diag_D(i) > 0.0) active.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(active.size());
  Matrix sub(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      sub(a, b) = kp.Kbar(active[a], active[b]);
    }
  }
  const numerics::Spectrum spec = numerics::sym_eig(SymMatrix(sub));
  const double lambda_k = spec.eigenvalues(k - 1);  // k-th smallest
  if (lambda_k <= kLambdaZeroTol) return kInf;
  return static_cast<double>(k) / lambda_k * ratio;
}

ExactRer exact_rer_discrete(const DiscreteJoint& p, const DiscreteJoint& q) {
  require_same_shape(p, q);
  const KernelMatrix kp = build_kernel(p);
  const KernelMatrix kq = build_kernel(q);
  // The pencil is sup v^T K_Q v / v^T K_P v; generalized_max_eig takes
  // (B, A) = (numerator, denominator).
  const numerics::GenMaxEig gen = numerics::generalized_max_eig(kq.K, kp.K);
  return {gen.value, gen.witness};
}

bool is_connected(const DiscreteJoint& p) {
  if (p.num_features() != 2) {
    throw Unsupported("is_connected: only defined for k = 2");
  }
  const int r1 = p.arities()[0];
  const int r2 = p.arities()[1];
  const Matrix w = p.pairwise(0, 1);
  const Vector m1 = p.marginal(0);
  const Vector m2 = p.marginal(1);

  // BFS over rows [0, r1) and columns [r1, r1+r2).
  std::vector<char> visited(r1 + r2, 0);
  int start = -1;
  for (int i = 0; i < r1 && start < 0; ++i) {
    if (m1(i) > 0.0) start = i;
  }
  if (start < 0) return true;  // degenerate: no mass anywhere
  std::deque<int> queue{start};
  visited[start] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (v < r1) {
      for (int j = 0; j < r2; ++j) {
        if (!visited[r1 + j] && w(v, j) > kEdgeTol) {
          visited[r1 + j] = 1;
          queue.push_back(r1 + j);
        }
      }
    } else {
      for (int i = 0; i < r1; ++i) {
        if (!visited[i] && w(i, v - r1) > kEdgeTol) {
          visited[i] = 1;
          queue.push_back(i);
        }
      }
    }
  }
  for (int i = 0; i < r1; ++i) {
    if (m1(i) > 0.0 && !visited[i]) return false;
  }
  for (int j = 0; j < r2; ++j) {
    if (m2(j) > 0.0 && !visited[r1 + j]) return false;
  }
  return true;
}

double additive_eval(const DiscreteJoint& shape, const Vector& v,
                     const std::vector<int>& idx) {
  double out = 0.0;
  for (int i = 0; i < shape.num_features(); ++i) {
    out += v(shape.block_offset(i) + idx[i]);
  }
  return out;
}

Prop1Report check_prop1(const DiscreteJoint& p, const DiscreteJoint& q,
                        const std::vector<double>& y, const Vector& fstar,
                        const Vector& f) {
  require_same_shape(p, q);
  if (y.size() != p.table().size()) {
    throw ShapeMismatch("check_prop1: label table size mismatch");
  }
  const int r = p.total_dim();
  if (fstar.size() != r || f.size() != r) {
    throw ShapeMismatch("check_prop1: coefficient length mismatch");
  }
  Prop1Report rep;
  double e_mid = 0.0, e_q_f = 0.0, e_p_f = 0.0;
  std::vector<int> idx(p.num_features(), 0);
  const std::vector<int>& arities = p.arities();
  std::size_t flat = 0;
  // Exact expectations by summation over the full product space.
  while (true) {
    const double yv = y[flat];
    const double fs = additive_eval(p, fstar, idx);
    const double fv = additive_eval(p, f, idx);
    const double pm = p.table()[flat];
    const double qm = q.table()[flat];
    e_mid += 0.5 * (pm + qm) * (yv - fs) * (yv - fs);
    e_q_f += qm * (yv - fv) * (yv - fv);
    e_p_f += pm * (yv - fv) * (yv - fv);
    ++flat;
    int i = p.num_features() - 1;
    while (i >= 0) {
      if (++idx[i] < arities[i]) break;
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  rep.eps_f = e_mid;
  rep.tau = exact_rer_discrete(p, q).tau;
  rep.lhs = e_q_f;
  rep.rhs = (8.0 * rep.tau + 4.0) * rep.eps_f + 4.0 * rep.tau * e_p_f;
  rep.holds = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

}  // namespace extrap::discrete
