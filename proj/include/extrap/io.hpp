#ifndef EXTRAP_IO_HPP
#define EXTRAP_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "extrap/discrete.hpp"
#include "extrap/experiments.hpp"
#include "extrap/numerics.hpp"

namespace extrap::io {

/// Joint table text format: header `arities: r1 r2 ... rk`, then one line
/// per cell `i1 i2 ... ik mass` with 1-based indices; unlisted cells are 0.
discrete::DiscreteJoint load_joint(const std::string& path);

/// Whitespace-separated vectors, one per line; renormalized to unit norm
/// with a warning on stderr when the deviation exceeds 1e-6.
std::vector<numerics::Vector> load_unit_points(const std::string& path);

/// Flat `key = value` config with `#` comments. Unknown keys are the
/// caller's to reject; the parser rejects duplicate keys and bad syntax.
std::map<std::string, std::string> load_config(const std::string& path);

/// Fails on any key in `config` outside `known`, naming the offender.
void reject_unknown_keys(const std::map<std::string, std::string>& config,
                         const std::vector<std::string>& known);

experiments::ExperimentConfig parse_experiment_config(
    const std::map<std::string, std::string>& config);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// 17-significant-digit representation for CSV cells; infinities serialize
/// as `inf` / `-inf`.
std::string format_double_csv(double v);

/// Human-readable `key: value` report lines.
struct TextReport {
  std::vector<std::pair<std::string, std::string>> lines;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  std::string str() const;
};

void write_text_file(const std::string& path, const std::string& content);

/// Per-run curve CSV: epoch, id_loss, ood_loss.
void write_run_csv(const std::string& path,
                   const experiments::RunReport& report);

/// Summary CSV across runs: run_id, model_kind, hidden, reg, final_id,
/// final_ood, ratio.
void write_summary_csv(const std::string& path,
                       const std::vector<experiments::RunReport>& reports);

}  // namespace extrap::io

#endif  // EXTRAP_IO_HPP
