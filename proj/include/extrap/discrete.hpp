#ifndef EXTRAP_DISCRETE_HPP
#define EXTRAP_DISCRETE_HPP

#include <vector>

#include "extrap/numerics.hpp"

namespace extrap::discrete {

using numerics::Matrix;
using numerics::SymMatrix;
using numerics::Vector;
using numerics::kInf;

/// Full joint probability table over k discrete features. Entries are
/// nonnegative and sum to 1 within 1e-12; desk-scale guard k in [2,5],
/// each arity <= 12.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<int> arities, std::vector<double> table);

  int num_features() const { return static_cast<int>(arities_.size()); }
  const std::vector<int>& arities() const { return arities_; }
  const std::vector<double>& table() const { return table_; }

  /// Probability mass at a cell, indices 0-based.
  double mass(const std::vector<int>& idx) const;

  /// Marginal distribution of feature i.
  Vector marginal(int i) const;

  /// Pairwise joint of features (i, j) as an r_i x r_j matrix; for i == j
  /// returns diag of the marginal.
  Matrix pairwise(int i, int j) const;

  /// Total basis dimension r = sum of arities.
  int total_dim() const;

  /// Offset of feature i's block inside the length-r coefficient vector.
  int block_offset(int i) const;

 private:
  std::vector<int> arities_;
  std::vector<int> strides_;
  std::vector<double> table_;
};

/// Signless-Laplacian kernel pair of a joint: block matrix K with marginal
/// masses on the diagonal blocks and pairwise joints off-diagonal, plus the
/// normalized form Kbar = D^{-1/2} K D^{-1/2}. Rows and columns of Kbar at
/// zero-mass coordinates are zero (pseudo-inverse completion).
struct KernelMatrix {
  int r = 0;
  std::vector<int> block_offsets;  // cumulative arity prefix sums, size k+1
  SymMatrix K;
  SymMatrix Kbar;
  Vector diag_D;  // marginal masses per coordinate
};

KernelMatrix build_kernel(const DiscreteJoint& joint);

/// max over features i and values t of Q(x_i=t)/P(x_i=t), with 0/0 = 0 and
/// positive/0 = +infinity.
double marginal_ratio_max(const DiscreteJoint& p, const DiscreteJoint& q);

/// Upper bound k * lambda_k(Kbar_P)^{-1} * marginal_ratio_max(P,Q); +infinity
/// when lambda_k is numerically zero or the marginal ratio is infinite.
double rer_upper_bound_discrete(const DiscreteJoint& p, const DiscreteJoint& q);

/// Exact restricted error ratio with the maximizing coefficient vector.
struct ExactRer {
  double tau = 0.0;
  Vector witness;
};

ExactRer exact_rer_discrete(const DiscreteJoint& p, const DiscreteJoint& q);

/// Connectivity of the bipartite graph whose edge weights are entries of the
/// k=2 joint above 1e-15, over vertices with positive marginal mass.
bool is_connected(const DiscreteJoint& p);

/// Numerical check of the loss-transfer inequality: with
/// eps_F = E_{(P+Q)/2}[(y - f*)^2] and tau the exact restricted error ratio,
/// E_Q[(y-f)^2] <= (8 tau + 4) eps_F + 4 tau E_P[(y-f)^2].
struct Prop1Report {
  double eps_f = 0.0;
  double tau = 0.0;
  double lhs = 0.0;  // E_Q[(y - f)^2]
  double rhs = 0.0;
  bool holds = false;
};

/// y is a full label table over the product space (same layout as the joint
/// table); fstar and f are additive coefficient vectors of length r.
Prop1Report check_prop1(const DiscreteJoint& p, const DiscreteJoint& q,
                        const std::vector<double>& y, const Vector& fstar,
                        const Vector& f);

/// Value of the additive function with coefficients v at cell idx.
double additive_eval(const DiscreteJoint& shape, const Vector& v,
                     const std::vector<int>& idx);

}  // namespace extrap::discrete

#endif  // EXTRAP_DISCRETE_HPP
