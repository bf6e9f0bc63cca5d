#include "extrap/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace extrap::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  return in;
}

}  // namespace

discrete::DiscreteJoint load_joint(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  std::vector<int> arities;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("arities:", 0) != 0) {
      throw IoError(path + ": expected `arities: r1 r2 ...` header");
    }
    std::istringstream header(line.substr(8));
    int r;
    while (header >> r) arities.push_back(r);
    break;
  }
  if (arities.empty()) {
    throw IoError(path + ": missing arities header");
  }
  std::size_t cells = 1;
  for (int r : arities) {
    if (r < 1) throw IoError(path + ": arities must be positive");
    cells *= static_cast<std::size_t>(r);
  }
  std::vector<double> table(cells, 0.0);
  std::vector<std::size_t> strides(arities.size(), 1);
  for (int i = static_cast<int>(arities.size()) - 2; i >= 0; --i) {
    strides[i] = strides[i + 1] * static_cast<std::size_t>(arities[i + 1]);
  }
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cell(line);
    std::size_t flat = 0;
    for (std::size_t i = 0; i < arities.size(); ++i) {
      int idx;
      if (!(cell >> idx) || idx < 1 || idx > arities[i]) {
        throw IoError(path + ": bad cell index in line: " + line);
      }
      flat += static_cast<std::size_t>(idx - 1) * strides[i];
    }
    double mass;
    if (!(cell >> mass)) {
      throw IoError(path + ": missing mass in line: " + line);
    }
    table[flat] = mass;
  }
  return discrete::DiscreteJoint(arities, table);
}

std::vector<numerics::Vector> load_unit_points(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<numerics::Vector> points;
  std::string line;
  std::size_t warned = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::vector<double> vals;
    double v;
    while (row >> v) vals.push_back(v);
    if (vals.empty()) continue;
    numerics::Vector x =
        Eigen::Map<numerics::Vector>(vals.data(), vals.size());
    const double norm = x.norm();
    if (norm <= 0.0) {
      throw IoError(path + ": zero vector cannot be normalized");
    }
    if (std::abs(norm - 1.0) > 1e-6 && warned++ == 0) {
      std::cerr << "warning: " << path
                << ": renormalizing points with norm deviation > 1e-6\n";
    }
    points.push_back(x / norm);
  }
  return points;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": empty key or value");
    }
    if (!out.emplace(key, value).second) {
      throw ConfigError(path + ": duplicate key `" + key + "`");
    }
  }
  return out;
}

void reject_unknown_keys(const std::map<std::string, std::string>& config,
                         const std::vector<std::string>& known) {
  for (const auto& [key, value] : config) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key `" + key + "`");
    }
  }
}

namespace {

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key `" + key + "`: bad number `" + s + "`");
  }
}

long parse_long(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key `" + key + "`: bad integer `" + s + "`");
  }
}

}  // namespace

experiments::ExperimentConfig parse_experiment_config(
    const std::map<std::string, std::string>& config) {
  static const std::vector<std::string> known = {
      "d1",          "d2",
      "gamma",       "hidden_structured",
      "hidden_unstructured", "hidden_ground_truth",
      "lr",          "momentum",
      "batch_size",  "batches_per_epoch",
      "epochs",      "init_std",
      "reg",         "reg_lambda",
      "seed"};
  reject_unknown_keys(config, known);
  experiments::ExperimentConfig out;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = config.find(key);
    return it == config.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("d1")) out.d1 = static_cast<int>(parse_long(*v, "d1"));
  if (const auto* v = get("d2")) out.d2 = static_cast<int>(parse_long(*v, "d2"));
  if (const auto* v = get("gamma")) out.gamma = parse_double(*v, "gamma");
  if (const auto* v = get("hidden_structured")) {
    out.hidden_structured = static_cast<int>(parse_long(*v, "hidden_structured"));
  }
  if (const auto* v = get("hidden_unstructured")) {
    out.hidden_unstructured =
        static_cast<int>(parse_long(*v, "hidden_unstructured"));
  }
  if (const auto* v = get("hidden_ground_truth")) {
    out.hidden_ground_truth =
        static_cast<int>(parse_long(*v, "hidden_ground_truth"));
  }
  if (const auto* v = get("lr")) out.lr = parse_double(*v, "lr");
  if (const auto* v = get("momentum")) {
    out.momentum = parse_double(*v, "momentum");
  }
  if (const auto* v = get("batch_size")) {
    out.batch_size = static_cast<int>(parse_long(*v, "batch_size"));
  }
  if (const auto* v = get("batches_per_epoch")) {
    out.batches_per_epoch =
        static_cast<int>(parse_long(*v, "batches_per_epoch"));
  }
  if (const auto* v = get("epochs")) {
    out.epochs = static_cast<int>(parse_long(*v, "epochs"));
  }
  if (const auto* v = get("init_std")) {
    out.init_std = parse_double(*v, "init_std");
  }
  if (const auto* v = get("reg")) {
    if (*v == "none") {
      out.reg = experiments::RegKind::none;
    } else if (*v == "l1") {
      out.reg = experiments::RegKind::l1;
    } else if (*v == "l2") {
      out.reg = experiments::RegKind::l2;
    } else {
      throw ConfigError("config key `reg`: expected none|l1|l2, got `" + *v +
                        "`");
    }
  }
  if (const auto* v = get("reg_lambda")) {
    out.reg_lambda = parse_double(*v, "reg_lambda");
  }
  if (const auto* v = get("seed")) {
    out.seed = static_cast<std::uint64_t>(parse_long(*v, "seed"));
  }
  out.validate();
  return out;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  if (std::rint(v) == v && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
  }
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

std::string format_double_csv(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void TextReport::add(const std::string& key, const std::string& value) {
  lines.emplace_back(key, value);
}

void TextReport::add(const std::string& key, double value) {
  lines.emplace_back(key, format_double(value));
}

std::string TextReport::str() const {
  std::ostringstream out;
  for (const auto& [key, value] : lines) {
    out << key << ": " << value << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

void write_run_csv(const std::string& path,
                   const experiments::RunReport& report) {
  std::ostringstream out;
  out << "epoch,id_loss,ood_loss\n";
  for (std::size_t e = 0; e < report.id_curve.size(); ++e) {
    out << (e + 1) << "," << format_double_csv(report.id_curve[e]) << ","
        << format_double_csv(report.ood_curve[e]) << "\n";
  }
  write_text_file(path, out.str());
}

void write_summary_csv(const std::string& path,
                       const std::vector<experiments::RunReport>& reports) {
  std::ostringstream out;
  out << "run_id,model_kind,hidden,reg,final_id,final_ood,ratio\n";
  for (const auto& r : reports) {
    out << r.run_id << "," << experiments::to_string(r.model_kind) << ","
        << r.hidden << "," << experiments::to_string(r.reg) << ","
        << format_double_csv(r.id_loss) << ","
        << format_double_csv(r.ood_loss) << ","
        << format_double_csv(r.ood_loss / r.id_loss) << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace extrap::io
