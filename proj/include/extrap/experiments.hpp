#ifndef EXTRAP_EXPERIMENTS_HPP
#define EXTRAP_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "extrap/gaussian.hpp"
#include "extrap/numerics.hpp"

namespace extrap::experiments {

using numerics::Matrix;
using numerics::SymMatrix;
using numerics::Vector;

enum class RegKind { none, l1, l2 };
enum class ModelKind { structured, unstructured };

std::string to_string(RegKind r);
std::string to_string(ModelKind m);

/// Desk-scale defaults mirror the full-scale setup at reduced width and
/// duration; absolute losses are width- and duration-dependent, so consumers
/// should compare ratios, not the full-scale table values.
struct ExperimentConfig {
  int d1 = 16;
  int d2 = 16;
  double gamma = 0.9;          // cross-block correlation scale, in [0, 1)
  int hidden_structured = 64;  // width of each structured component
  int hidden_unstructured = 128;
  int hidden_ground_truth = 0;  // 0 means half the trained structured width
  double lr = 1e-2;
  double momentum = 0.9;
  int batch_size = 128;
  int batches_per_epoch = 100;
  int epochs = 150;
  double init_std = 0.05;  // smaller inits park both models on a bad plateau
  RegKind reg = RegKind::none;
  double reg_lambda = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  int ground_truth_hidden() const {
    return hidden_ground_truth > 0 ? hidden_ground_truth
                                   : hidden_structured / 2;
  }
};

/// Two-layer ReLU regressor f(x) = w2^T relu(W1 x + b1), trained by
/// explicit backprop.
struct MLP2 {
  Matrix w1;
  Vector b1;
  Vector w2;

  static MLP2 random(int in_dim, int hidden, double std,
                     numerics::NormalStream& stream);

  /// Batch forward; inputs are columns.
  Vector forward(const Matrix& x) const;
};

/// Structured model: sum of one MLP2 per input block. Unstructured: a single
/// MLP2 over the concatenated input.
struct AdditiveModel {
  ModelKind kind = ModelKind::structured;
  int d1 = 0;  // split point for the structured case
  std::vector<MLP2> parts;

  Vector forward(const Matrix& x) const;
  bool finite() const;
};

/// Source/target covariances [[I, gamma O],[gamma O^T, I]] with independent
/// orthonormal O per distribution; lambda_min equals 1 - gamma on both.
std::pair<SymMatrix, SymMatrix> make_covariances(int d1, int d2, double gamma,
                                                 std::uint64_t seed);

/// Frozen random structured labeler f*_1 + f*_2 at O(1) output scale.
AdditiveModel make_ground_truth(const ExperimentConfig& config,
                                std::uint64_t seed);

struct RunReport {
  std::string run_id;
  ModelKind model_kind = ModelKind::structured;
  int hidden = 0;
  RegKind reg = RegKind::none;
  double reg_lambda = 0.0;
  int epochs_run = 0;
  double id_loss = 0.0;
  double ood_loss = 0.0;
  std::vector<double> id_curve;   // one entry per epoch
  std::vector<double> ood_curve;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct TrainResult {
  RunReport report;
  AdditiveModel model;
};

/// SGD with momentum on the mean-squared error, fresh source-distribution
/// mini-batches every step, ID/OOD losses on fixed held-out batches.
/// Optional L1/L2 penalty on the weights. Throws DivergenceDetected when the
/// training loss leaves the finite range.
TrainResult train(ModelKind kind, const ExperimentConfig& config);

/// Structured run plus an unstructured run whose epoch budget is extended
/// (up to 3x the structured count) until its ID loss is within 2x of the
/// structured one.
struct ComparisonResult {
  TrainResult structured;
  TrainResult unstructured;
};

ComparisonResult run_comparison(const ExperimentConfig& config);

struct SweepSetting {
  std::string name;
  ModelKind kind = ModelKind::unstructured;
  int hidden = 0;
  RegKind reg = RegKind::none;
  double reg_lambda = 0.0;
};

/// One run per setting with the base config's seed shared across settings,
/// so data, ground truth, and evaluation batches are paired.
std::vector<RunReport> ablation_sweep(const std::vector<SweepSetting>& sweep,
                                      const ExperimentConfig& base);

/// Held-out evaluation batches (ID from Sigma_P, OOD from Sigma_Q) for a
/// config; deterministic per seed. Exposed for discrepancy-ratio checks.
struct EvalData {
  Matrix x_id;
  Matrix x_ood;
  Vector y_id;
  Vector y_ood;
};

EvalData make_eval_data(const ExperimentConfig& config, Eigen::Index n_eval);

}  // namespace extrap::experiments

#endif  // EXTRAP_EXPERIMENTS_HPP
