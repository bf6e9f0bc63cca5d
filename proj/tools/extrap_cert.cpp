// Command-line front end: one subcommand per certification routine plus the
// synthetic-experiment drivers. Exit codes: 0 success, 1 validation error,
// 2 numerical failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "extrap/discrete.hpp"
#include "extrap/errors.hpp"
#include "extrap/experiments.hpp"
#include "extrap/gaussian.hpp"
#include "extrap/hermite.hpp"
#include "extrap/io.hpp"
#include "extrap/lowerbound.hpp"
#include "extrap/numerics.hpp"

namespace {

using extrap::numerics::Matrix;
using extrap::numerics::SymMatrix;
using extrap::numerics::Vector;
namespace io = extrap::io;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

void emit(const io::TextReport& report, const std::string& out_path) {
  std::cout << report.str();
  if (!out_path.empty()) io::write_text_file(out_path, report.str());
}

void require_no_nan(double v, const std::string& what) {
  if (std::isnan(v)) {
    throw extrap::DegenerateDenominator("NaN in " + what);
  }
}

std::vector<double> parse_number_list(const std::string& s,
                                      const std::string& key) {
  std::istringstream in(s);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) {
    throw extrap::ConfigError("config key `" + key + "`: bad number list");
  }
  return out;
}

Matrix parse_matrix(const std::string& s, Eigen::Index rows, Eigen::Index cols,
                    const std::string& key) {
  const std::vector<double> vals = parse_number_list(s, key);
  if (static_cast<Eigen::Index>(vals.size()) != rows * cols) {
    throw extrap::ConfigError("config key `" + key + "`: expected " +
                              std::to_string(rows * cols) + " entries, got " +
                              std::to_string(vals.size()));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = vals[static_cast<std::size_t>(i * cols + j)];
    }
  }
  return m;
}

long required_long(const std::map<std::string, std::string>& config,
                   const std::string& key, const std::string& path) {
  const auto it = config.find(key);
  if (it == config.end()) {
    throw extrap::ConfigError(path + ": missing key `" + key + "`");
  }
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw extrap::ConfigError(path + ": key `" + key + "`: bad integer");
  }
}

/// Correlation spec file: `d = 2`, `sigma = <d*d row-major entries>`,
/// optional `means` and `stds` (d entries each).
extrap::gaussian::CorrelationSpec load_correlation_spec(
    const std::string& path) {
  const auto config = io::load_config(path);
  io::reject_unknown_keys(config, {"d", "sigma", "means", "stds"});
  const Eigen::Index d = required_long(config, "d", path);
  const auto sigma_it = config.find("sigma");
  if (sigma_it == config.end()) {
    throw extrap::ConfigError(path + ": missing key `sigma`");
  }
  const Matrix sigma = parse_matrix(sigma_it->second, d, d, "sigma");
  Vector means = Vector::Zero(d);
  Vector stds = Vector::Ones(d);
  if (const auto it = config.find("means"); it != config.end()) {
    means = parse_matrix(it->second, d, 1, "means");
  }
  if (const auto it = config.find("stds"); it != config.end()) {
    stds = parse_matrix(it->second, d, 1, "stds");
  }
  return {sigma, means, stds};
}

/// Block spec file: `d1`, `d2`, `sigma12 = <d1*d2 row-major entries>`.
extrap::gaussian::BlockGaussianSpec load_block_spec(const std::string& path) {
  const auto config = io::load_config(path);
  io::reject_unknown_keys(config, {"d1", "d2", "sigma12"});
  const Eigen::Index d1 = required_long(config, "d1", path);
  const Eigen::Index d2 = required_long(config, "d2", path);
  const auto it = config.find("sigma12");
  if (it == config.end()) {
    throw extrap::ConfigError(path + ": missing key `sigma12`");
  }
  return extrap::gaussian::BlockGaussianSpec(
      parse_matrix(it->second, d1, d2, "sigma12"));
}

int run_discrete_bound(const std::string& p_path, const std::string& q_path,
                       const std::string& out_path) {
  namespace discrete = extrap::discrete;
  const discrete::DiscreteJoint p = io::load_joint(p_path);
  const discrete::DiscreteJoint q = io::load_joint(q_path);
  const discrete::KernelMatrix kp = discrete::build_kernel(p);
  const auto spectrum = extrap::numerics::sym_eig(kp.Kbar);
  const int k = p.num_features();
  const double lambda_k = spectrum.eigenvalues(k - 1);
  const double ratio = discrete::marginal_ratio_max(p, q);
  const double bound = discrete::rer_upper_bound_discrete(p, q);
  const discrete::ExactRer exact = discrete::exact_rer_discrete(p, q);
  require_no_nan(bound, "bound");
  require_no_nan(exact.tau, "exact ratio");

  io::TextReport report;
  report.add("bound", bound);
  report.add("exact", exact.tau);
  report.add("certificate", std::to_string(k) +
                                " / lambda_" + std::to_string(k) +
                                "(normalized kernel) * max marginal ratio");
  report.add("lambda_" + std::to_string(k), lambda_k);
  report.add("max_marginal_ratio", ratio);
  emit(report, out_path);
  return kExitOk;
}

int run_discrete_exact(const std::string& p_path, const std::string& q_path,
                       const std::string& out_path) {
  namespace discrete = extrap::discrete;
  const discrete::DiscreteJoint p = io::load_joint(p_path);
  const discrete::DiscreteJoint q = io::load_joint(q_path);
  const discrete::ExactRer exact = discrete::exact_rer_discrete(p, q);
  require_no_nan(exact.tau, "exact ratio");

  io::TextReport report;
  report.add("exact", exact.tau);
  report.add("certificate",
             "generalized max eigenvalue of the kernel pencil (K_Q, K_P)");
  if (exact.witness.size() > 0) {
    std::ostringstream w;
    for (Eigen::Index i = 0; i < exact.witness.size(); ++i) {
      if (i) w << " ";
      w << io::format_double(exact.witness(i));
    }
    report.add("witness", w.str());
  }
  emit(report, out_path);
  return kExitOk;
}

int run_discrete_connectivity(const std::string& p_path,
                              const std::string& out_path) {
  namespace discrete = extrap::discrete;
  const discrete::DiscreteJoint p = io::load_joint(p_path);
  const bool connected = discrete::is_connected(p);
  const discrete::KernelMatrix kp = discrete::build_kernel(p);
  const auto spectrum = extrap::numerics::sym_eig(kp.Kbar);
  const double lambda2 = spectrum.eigenvalues(1);

  io::TextReport report;
  report.add("connected", connected ? "true" : "false");
  report.add("lambda_2", lambda2);
  report.add("spectral_gap_positive", lambda2 > 1e-8 ? "true" : "false");
  emit(report, out_path);
  return kExitOk;
}

int run_prop1_check(const std::string& p_path, const std::string& q_path,
                    std::uint64_t seed, const std::string& out_path) {
  namespace discrete = extrap::discrete;
  const discrete::DiscreteJoint p = io::load_joint(p_path);
  const discrete::DiscreteJoint q = io::load_joint(q_path);
  const int r = p.total_dim();
  extrap::numerics::NormalStream stream(seed);
  const Vector fstar = stream.vector(r);
  const Vector f = fstar + 0.3 * stream.vector(r);

  // Labels: the reference additive function plus a non-additive perturbation,
  // so eps_F is strictly positive on typical draws.
  std::vector<double> y(p.table().size());
  std::vector<int> idx(p.num_features(), 0);
  for (std::size_t cell = 0; cell < y.size(); ++cell) {
    std::size_t rest = cell;
    for (int i = p.num_features() - 1; i >= 0; --i) {
      idx[static_cast<std::size_t>(i)] =
          static_cast<int>(rest % p.arities()[static_cast<std::size_t>(i)]);
      rest /= static_cast<std::size_t>(p.arities()[static_cast<std::size_t>(i)]);
    }
    y[cell] = discrete::additive_eval(p, fstar, idx) + 0.2 * stream.next();
  }

  const discrete::Prop1Report rep = discrete::check_prop1(p, q, y, fstar, f);
  io::TextReport report;
  report.add("eps_f", rep.eps_f);
  report.add("tau", rep.tau);
  report.add("lhs", rep.lhs);
  report.add("rhs", rep.rhs);
  report.add("holds", rep.holds ? "true" : "false");
  emit(report, out_path);
  return rep.holds ? kExitOk : kExitNumerical;
}

int run_gaussian_bound_pairwise(const std::string& spec_path,
                                const std::string& out_path) {
  const auto spec = load_correlation_spec(spec_path);
  const double bound = extrap::gaussian::rer_bound_pairwise(spec);
  const auto spectrum = extrap::numerics::sym_eig(spec.sigma());
  require_no_nan(bound, "bound");

  io::TextReport report;
  report.add("bound", bound);
  report.add("certificate", "d / lambda_min(correlation matrix)");
  report.add("d", std::to_string(spec.dim()));
  report.add("lambda_min", spectrum.eigenvalues(0));
  emit(report, out_path);
  return kExitOk;
}

int run_gaussian_bound_block(const std::string& spec_path,
                             const std::string& out_path) {
  const auto spec = load_block_spec(spec_path);
  const auto bound = extrap::gaussian::rer_bound_two_block(spec);
  require_no_nan(bound.bound, "bound");

  io::TextReport report;
  report.add("bound", bound.bound);
  report.add("certificate", "2 / (1 - sigma_max(cross block))");
  report.add("sigma_max", bound.sigma_max);
  report.add("lambda_min_block", bound.lambda_min_block);
  emit(report, out_path);
  return kExitOk;
}

int run_gaussian_exact_kappa(const std::string& p_path,
                             const std::string& q_path, int truncation,
                             const std::string& out_path) {
  const auto p = load_correlation_spec(p_path);
  const auto q = load_correlation_spec(q_path);
  const auto kappa = extrap::gaussian::exact_kappa(p, q, truncation);
  const double bound = extrap::gaussian::rer_bound_pairwise(p);
  require_no_nan(kappa.kappa, "kappa");

  io::TextReport report;
  report.add("kappa", kappa.kappa);
  report.add("bound", bound);
  report.add("certificate",
             "max over levels n of the generalized max eigenvalue of the "
             "elementwise-power pencil");
  report.add("argmax_level", std::to_string(kappa.argmax_level));
  report.add("levels_evaluated", std::to_string(kappa.levels_evaluated));
  report.add("truncated_early", kappa.truncated_early ? "true" : "false");
  if (kappa.tail_bound) report.add("tail_bound", *kappa.tail_bound);
  emit(report, out_path);
  return kExitOk;
}

int run_mehler_check(double rho, int truncation, const std::string& out_path) {
  namespace hermite = extrap::hermite;
  // The eigenseries tail is geometric in rho, so the requested truncation is
  // a floor: it gets extended until the tail bound clears the tolerance.
  const int n = hermite::mehler_identity_truncation(rho, truncation, 1e-9);
  double max_series_error = 0.0;
  double max_density_error = 0.0;
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 25; ++j) {
      const double x1 = -3.0 + 6.0 * i / 24.0;
      const double x2 = -3.0 + 6.0 * j / 24.0;
      const double closed = hermite::mehler_closed_form(rho, x1, x2);
      const double series = hermite::mehler_series(rho, x1, x2, n);
      max_series_error = std::max(max_series_error, std::abs(closed - series));
      const double phi1 = std::exp(-0.5 * x1 * x1) / std::sqrt(2.0 * M_PI);
      const double phi2 = std::exp(-0.5 * x2 * x2) / std::sqrt(2.0 * M_PI);
      const double density =
          std::exp(-(x1 * x1 + x2 * x2 - 2.0 * rho * x1 * x2) /
                   (2.0 * (1.0 - rho * rho))) /
          (2.0 * M_PI * std::sqrt(1.0 - rho * rho));
      max_density_error = std::max(
          max_density_error, std::abs(closed * std::sqrt(phi1 * phi2) - density));
    }
  }
  io::TextReport report;
  report.add("rho", rho);
  report.add("truncation", std::to_string(n));
  report.add("max_series_error", max_series_error);
  report.add("max_density_error", max_density_error);
  const bool pass = max_series_error <= 1e-8 && max_density_error <= 1e-10;
  report.add("pass", pass ? "true" : "false");
  emit(report, out_path);
  return pass ? kExitOk : kExitNumerical;
}

int run_lemma_checks(std::uint64_t seed, int instances,
                     const std::string& out_path) {
  namespace gaussian = extrap::gaussian;
  extrap::numerics::NormalStream stream(seed);
  int lemma3_pass = 0;
  int lemma4_pass = 0;
  int lemma5_pass = 0;
  const int dims[] = {2, 4, 8};
  for (int i = 0; i < instances; ++i) {
    const Eigen::Index d = dims[i % 3];
    const Matrix a = stream.matrix(d, d);
    Matrix s = a * a.transpose() + 0.1 * Matrix::Identity(d, d);
    const Vector inv_sqrt = s.diagonal().cwiseSqrt().cwiseInverse();
    s = inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal();
    if (gaussian::lemma3_check(SymMatrix(s), 6).holds) ++lemma3_pass;

    const Matrix cross = gaussian::random_admissible_cross_block(
        d, d, 0.95, 0.95, seed + static_cast<std::uint64_t>(i));
    if (gaussian::lemma4_check(cross)) ++lemma4_pass;
    if (gaussian::lemma5_check(cross).holds) ++lemma5_pass;
  }
  io::TextReport report;
  report.add("instances", std::to_string(instances));
  report.add("elementwise_power_min_eig_pass", std::to_string(lemma3_pass));
  report.add("cross_block_sigma_max_pass", std::to_string(lemma4_pass));
  report.add("block_min_eig_identity_pass", std::to_string(lemma5_pass));
  const bool pass = lemma3_pass == instances && lemma4_pass == instances &&
                    lemma5_pass == instances;
  report.add("pass", pass ? "true" : "false");
  emit(report, out_path);
  return pass ? kExitOk : kExitNumerical;
}

int run_lowerbound_witness(const std::string& p_path, const std::string& q_path,
                           double eps, double scale,
                           const std::string& out_path) {
  namespace lowerbound = extrap::lowerbound;
  const auto p_points = io::load_unit_points(p_path);
  const auto q_points = io::load_unit_points(q_path);
  const auto [net, rep] =
      lowerbound::build_witness(p_points, q_points, eps, scale);

  io::TextReport report;
  report.add("num_centers", std::to_string(rep.num_centers));
  report.add("max_abs_on_p", rep.max_abs_on_p);
  report.add("min_on_q", rep.min_on_q);
  report.add("scale", scale);
  emit(report, out_path);
  return kExitOk;
}

extrap::experiments::ExperimentConfig load_experiment_config(
    const std::string& config_path, std::uint64_t seed) {
  extrap::experiments::ExperimentConfig config;
  if (!config_path.empty()) {
    config = io::parse_experiment_config(io::load_config(config_path));
  }
  config.seed = seed;
  return config;
}

int run_experiment(const std::string& config_path, std::uint64_t seed,
                   const std::string& out_dir) {
  namespace experiments = extrap::experiments;
  const auto config = load_experiment_config(config_path, seed);
  std::filesystem::create_directories(out_dir);
  const auto result = experiments::run_comparison(config);

  const auto& s = result.structured.report;
  const auto& u = result.unstructured.report;
  io::write_run_csv(out_dir + "/structured.csv", s);
  io::write_run_csv(out_dir + "/unstructured.csv", u);
  io::write_summary_csv(out_dir + "/summary.csv", {s, u});

  io::TextReport report;
  report.add("structured_id_loss", s.id_loss);
  report.add("structured_ood_loss", s.ood_loss);
  report.add("structured_epochs", std::to_string(s.epochs_run));
  report.add("unstructured_id_loss", u.id_loss);
  report.add("unstructured_ood_loss", u.ood_loss);
  report.add("unstructured_epochs", std::to_string(u.epochs_run));
  report.add("ood_ratio_unstructured_over_structured", u.ood_loss / s.ood_loss);
  emit(report, out_dir + "/report.txt");
  return kExitOk;
}

int run_ablation(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_dir, std::vector<int> widths,
                 std::vector<std::string> regs, double reg_lambda) {
  namespace experiments = extrap::experiments;
  const auto config = load_experiment_config(config_path, seed);
  std::filesystem::create_directories(out_dir);

  std::vector<experiments::SweepSetting> sweep;
  sweep.push_back({"structured", experiments::ModelKind::structured,
                   config.hidden_structured, experiments::RegKind::none, 0.0});
  for (int w : widths) {
    if (w < 1) throw extrap::InvalidInput("ablation: widths must be >= 1");
    sweep.push_back({"unstructured_w" + std::to_string(w),
                     experiments::ModelKind::unstructured, w,
                     experiments::RegKind::none, 0.0});
  }
  for (const std::string& r : regs) {
    experiments::RegKind kind;
    if (r == "none") {
      kind = experiments::RegKind::none;
    } else if (r == "l1") {
      kind = experiments::RegKind::l1;
    } else if (r == "l2") {
      kind = experiments::RegKind::l2;
    } else {
      throw extrap::InvalidInput("ablation: unknown reg `" + r + "`");
    }
    if (kind == experiments::RegKind::none) continue;
    sweep.push_back({"unstructured_" + r, experiments::ModelKind::unstructured,
                     config.hidden_unstructured, kind, reg_lambda});
  }

  const auto reports = experiments::ablation_sweep(sweep, config);
  io::write_summary_csv(out_dir + "/summary.csv", reports);
  io::TextReport report;
  for (const auto& r : reports) {
    io::write_run_csv(out_dir + "/" + r.run_id + ".csv", r);
    report.add(r.run_id + "_id_loss", r.id_loss);
    report.add(r.run_id + "_ood_loss", r.ood_loss);
  }
  emit(report, out_dir + "/report.txt");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified extrapolation-ratio bounds for additive models"};
  app.require_subcommand(1);

  std::string joint_p, joint_q, out_path, spec_path, spec_q_path;
  std::string config_path, out_dir = ".";
  std::string p_points_path, q_points_path;
  std::uint64_t seed = 0;
  int truncation = 60;
  int kappa_truncation = 40;
  int instances = 50;
  double rho = 0.0, eps = 0.5, scale = 1.0, reg_lambda = 1e-4;
  std::vector<int> widths = {8, 16, 32};
  std::vector<std::string> regs = {"l1", "l2"};

  auto* discrete_bound = app.add_subcommand(
      "discrete-bound", "Spectral upper bound and exact ratio, discrete joints");
  discrete_bound->add_option("--joint-p", joint_p)->required();
  discrete_bound->add_option("--joint-q", joint_q)->required();
  discrete_bound->add_option("--out", out_path);

  auto* discrete_exact = app.add_subcommand(
      "discrete-exact", "Exact restricted error ratio, discrete joints");
  discrete_exact->add_option("--joint-p", joint_p)->required();
  discrete_exact->add_option("--joint-q", joint_q)->required();
  discrete_exact->add_option("--out", out_path);

  auto* connectivity = app.add_subcommand(
      "discrete-connectivity", "Bipartite connectivity and spectral gap");
  connectivity->add_option("--joint-p", joint_p)->required();
  connectivity->add_option("--out", out_path);

  auto* prop1 = app.add_subcommand(
      "prop1-check", "Loss-transfer inequality on a random labeled instance");
  prop1->add_option("--joint-p", joint_p)->required();
  prop1->add_option("--joint-q", joint_q)->required();
  prop1->add_option("--seed", seed)->required();
  prop1->add_option("--out", out_path);

  auto* pairwise = app.add_subcommand(
      "gaussian-bound-pairwise", "d / lambda_min bound for a correlation spec");
  pairwise->add_option("--spec", spec_path)->required();
  pairwise->add_option("--out", out_path);

  auto* block = app.add_subcommand(
      "gaussian-bound-block", "Two-block Gaussian bound 2/(1 - sigma_max)");
  block->add_option("--spec", spec_path)->required();
  block->add_option("--out", out_path);

  auto* kappa = app.add_subcommand(
      "gaussian-exact-kappa", "Exact ratio for standard pairwise-Gaussian pairs");
  kappa->add_option("--spec-p", spec_path)->required();
  kappa->add_option("--spec-q", spec_q_path)->required();
  kappa->add_option("--truncation", kappa_truncation);
  kappa->add_option("--out", out_path);

  auto* mehler = app.add_subcommand(
      "mehler-check", "Kernel eigenseries vs closed form on a grid");
  mehler->add_option("--rho", rho)->required();
  mehler->add_option("--n", truncation);
  mehler->add_option("--out", out_path);

  auto* lemmas = app.add_subcommand(
      "lemma-checks", "Elementwise-power and block-matrix eigenvalue identities");
  lemmas->add_option("--seed", seed)->required();
  lemmas->add_option("--instances", instances);
  lemmas->add_option("--out", out_path);

  auto* witness = app.add_subcommand(
      "lowerbound-witness", "Bump-network witness separating Q from P support");
  witness->add_option("--p-points", p_points_path)->required();
  witness->add_option("--q-points", q_points_path)->required();
  witness->add_option("--eps", eps)->required();
  witness->add_option("--scale", scale);
  witness->add_option("--out", out_path);

  auto* experiment = app.add_subcommand(
      "experiment", "Structured vs unstructured training comparison");
  experiment->add_option("--config", config_path);
  experiment->add_option("--seed", seed)->required();
  experiment->add_option("--out-dir", out_dir);

  auto* ablation = app.add_subcommand(
      "ablation", "Width and regularization sweeps for the unstructured model");
  ablation->add_option("--config", config_path);
  ablation->add_option("--seed", seed)->required();
  ablation->add_option("--out-dir", out_dir);
  ablation->add_option("--widths", widths);
  ablation->add_option("--regs", regs);
  ablation->add_option("--reg-lambda", reg_lambda);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (discrete_bound->parsed()) {
      return run_discrete_bound(joint_p, joint_q, out_path);
    }
    if (discrete_exact->parsed()) {
      return run_discrete_exact(joint_p, joint_q, out_path);
    }
    if (connectivity->parsed()) {
      return run_discrete_connectivity(joint_p, out_path);
    }
    if (prop1->parsed()) {
      return run_prop1_check(joint_p, joint_q, seed, out_path);
    }
    if (pairwise->parsed()) {
      return run_gaussian_bound_pairwise(spec_path, out_path);
    }
    if (block->parsed()) {
      return run_gaussian_bound_block(spec_path, out_path);
    }
    if (kappa->parsed()) {
      return run_gaussian_exact_kappa(spec_path, spec_q_path, kappa_truncation,
                                      out_path);
    }
    if (mehler->parsed()) {
      return run_mehler_check(rho, truncation, out_path);
    }
    if (lemmas->parsed()) {
      return run_lemma_checks(seed, instances, out_path);
    }
    if (witness->parsed()) {
      return run_lowerbound_witness(p_points_path, q_points_path, eps, scale,
                                    out_path);
    }
    if (experiment->parsed()) {
      return run_experiment(config_path, seed, out_dir);
    }
    if (ablation->parsed()) {
      return run_ablation(config_path, seed, out_dir, widths, regs, reg_lambda);
    }
  } catch (const extrap::NotPositiveDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const extrap::DegenerateDenominator& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const extrap::DivergenceDetected& e) {
    std::cerr << "numerical failure: " << e.what()
              << " (last finite epoch " << e.last_finite_epoch << ")\n";
    return kExitNumerical;
  } catch (const extrap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
