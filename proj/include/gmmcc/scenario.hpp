#pragma once

// Scenario configs (JSON), the built-in scenario catalog, SNR grids and the
// CSV format shared by the CLI and the plotting scripts.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gmmcc/bounds.hpp"
#include "gmmcc/linalg.hpp"
#include "gmmcc/measurement.hpp"
#include "gmmcc/monte_carlo.hpp"
#include "gmmcc/source.hpp"

namespace gmmcc {

struct ClassSpec {
  std::optional<double> prior;  // unset -> uniform
  std::vector<double> mean;     // empty -> zero mean
  std::vector<double> eigenvalues;
  std::optional<std::uint64_t> rotation_seed;
};

enum class KernelType { random, designed };

struct KernelSpec {
  KernelType type = KernelType::random;
  Index m = 1;
  std::uint64_t seed = 1;
  bool normalized = true;
};

struct SnrGrid {
  double start_db = 0.0;
  double stop_db = 60.0;
  double step_db = 2.0;
};

struct ScenarioConfig {
  std::string name;
  Index dim = 0;
  std::vector<ClassSpec> classes;
  KernelSpec kernel;
  SnrGrid snr;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
};

inline void validate(const ScenarioConfig& c) {
  if (c.name.empty()) throw InvalidInput("scenario name is empty");
  if (c.dim < 1) throw InvalidInput("dim must be >= 1");
  if (c.classes.size() < 2) throw InvalidInput("a scenario needs at least two classes");
  for (const auto& cl : c.classes) {
    if (static_cast<Index>(cl.eigenvalues.size()) != c.dim) {
      throw InvalidInput("eigenvalue list length must equal dim");
    }
    if (!cl.mean.empty() && static_cast<Index>(cl.mean.size()) != c.dim) {
      throw InvalidInput("mean length must equal dim");
    }
  }
  if (c.kernel.m < 1) throw InvalidInput("kernel m must be >= 1");
  if (!(c.snr.step_db > 0.0)) throw InvalidInput("snr step_db must be > 0");
  if (!(c.snr.stop_db >= c.snr.start_db)) throw InvalidInput("snr stop_db must be >= start_db");
  if (c.trials < 1) throw InvalidInput("trials must be >= 1");
}

/// start, start + step, ... up to stop (inclusive, with slack for rounding).
inline std::vector<double> snr_grid(const SnrGrid& g) {
  if (!(g.step_db > 0.0)) throw InvalidInput("snr step_db must be > 0");
  if (!(g.stop_db >= g.start_db)) throw InvalidInput("snr stop_db must be >= start_db");
  std::vector<double> out;
  const double span = (g.stop_db - g.start_db) / g.step_db;
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) out.push_back(g.start_db + static_cast<double>(k) * g.step_db);
  return out;
}

/// Parses "A:B:STEP".
inline SnrGrid parse_snr_grid(const std::string& text) {
  SnrGrid g;
  char c1 = 0;
  char c2 = 0;
  std::istringstream is(text);
  if (!(is >> g.start_db >> c1 >> g.stop_db >> c2 >> g.step_db) || c1 != ':' || c2 != ':' ||
      !(is >> std::ws).eof()) {
    throw InvalidInput("SNR grid must look like START:STOP:STEP, got '" + text + "'");
  }
  (void)snr_grid(g);
  return g;
}

inline GmmSource build_source(const ScenarioConfig& c) {
  validate(c);
  std::vector<ClassModel> classes;
  const double uniform = 1.0 / static_cast<double>(c.classes.size());
  for (const auto& cl : c.classes) {
    ClassModel m;
    m.prior = cl.prior.value_or(uniform);
    m.mean = cl.mean.empty() ? Vec(Vec::Zero(c.dim))
                             : Vec(Eigen::Map<const Vec>(cl.mean.data(), c.dim));
    m.covariance = covariance_from_spectrum(cl.eigenvalues, cl.rotation_seed);
    classes.push_back(std::move(m));
  }
  return GmmSource(std::move(classes));
}

inline MeasurementKernel build_kernel(const ScenarioConfig& c, const GmmSource& src) {
  if (c.kernel.type == KernelType::designed) return design_kernel(src, c.kernel.m);
  return random_gaussian_kernel(c.kernel.m, src.dim(), c.kernel.seed, c.kernel.normalized);
}

// ---- JSON ----

inline const char* to_string(KernelType t) {
  return t == KernelType::designed ? "designed" : "random";
}

inline KernelType parse_kernel_type(const std::string& s) {
  if (s == "random") return KernelType::random;
  if (s == "designed") return KernelType::designed;
  throw InvalidInput("kernel type must be 'random' or 'designed', got '" + s + "'");
}

inline nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["dim"] = c.dim;
  j["classes"] = nlohmann::json::array();
  for (const auto& cl : c.classes) {
    nlohmann::json o;
    if (cl.prior) o["prior"] = *cl.prior;
    if (!cl.mean.empty()) o["mean"] = cl.mean;
    o["eigenvalues"] = cl.eigenvalues;
    if (cl.rotation_seed) o["rotation_seed"] = *cl.rotation_seed;
    j["classes"].push_back(o);
  }
  nlohmann::json k;
  k["type"] = to_string(c.kernel.type);
  k["m"] = c.kernel.m;
  if (c.kernel.type == KernelType::random) {
    k["seed"] = c.kernel.seed;
    k["normalized"] = c.kernel.normalized;
  }
  j["kernel"] = k;
  j["snr"] = {{"start_db", c.snr.start_db}, {"stop_db", c.snr.stop_db}, {"step_db", c.snr.step_db}};
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  try {
    ScenarioConfig c;
    c.name = j.at("name").get<std::string>();
    c.dim = j.at("dim").get<Index>();
    for (const auto& o : j.at("classes")) {
      ClassSpec cl;
      if (o.contains("prior")) cl.prior = o.at("prior").get<double>();
      if (o.contains("mean")) cl.mean = o.at("mean").get<std::vector<double>>();
      cl.eigenvalues = o.at("eigenvalues").get<std::vector<double>>();
      if (o.contains("rotation_seed")) cl.rotation_seed = o.at("rotation_seed").get<std::uint64_t>();
      c.classes.push_back(std::move(cl));
    }
    const auto& k = j.at("kernel");
    c.kernel.type = parse_kernel_type(k.at("type").get<std::string>());
    c.kernel.m = k.at("m").get<Index>();
    c.kernel.seed = k.value("seed", std::uint64_t{1});
    c.kernel.normalized = k.value("normalized", true);
    if (j.contains("snr")) {
      const auto& s = j.at("snr");
      c.snr.start_db = s.at("start_db").get<double>();
      c.snr.stop_db = s.at("stop_db").get<double>();
      c.snr.step_db = s.at("step_db").get<double>();
    }
    // Signed read so that negative values are reported rather than wrapped.
    const auto trials = j.value("trials", std::int64_t{100000});
    if (trials < 1) throw InvalidInput("trials must be >= 1");
    c.trials = static_cast<std::uint64_t>(trials);
    c.seed = j.value("seed", std::uint64_t{1});
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("invalid scenario config: ") + e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

// ---- Built-in catalog ----

/// Rotation shared by the classes of the six-dimensional scenarios.
inline constexpr std::uint64_t kSharedRotationSeed = 20110;

inline std::vector<ScenarioConfig> builtin_scenarios() {
  auto cls = [](std::vector<double> eigs, std::vector<double> mean = {},
                std::optional<std::uint64_t> rot = kSharedRotationSeed) {
    ClassSpec c;
    c.eigenvalues = std::move(eigs);
    c.mean = std::move(mean);
    c.rotation_seed = rot;
    return c;
  };
  auto random_kernel = [](Index m) {
    KernelSpec k;
    k.type = KernelType::random;
    k.m = m;
    return k;
  };
  auto designed_kernel = [](Index m) {
    KernelSpec k;
    k.type = KernelType::designed;
    k.m = m;
    return k;
  };
  constexpr std::nullopt_t plain = std::nullopt;

  std::vector<ScenarioConfig> out;
  out.push_back({"fig1a-zero-mean-2class", 6,
                 {cls({1, 1, 0, 0, 0, 0}), cls({0, 1, 1, 1, 0, 0})},
                 random_kernel(4), {}, 100000, 1});
  out.push_back({"fig1b-nonzero-mean-2class", 6,
                 {cls({1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}),
                  cls({1, 1, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1})},
                 random_kernel(3), {}, 100000, 1});
  out.push_back({"fig1c-4class", 6,
                 {cls({1, 1, 0, 0, 0, 0}), cls({0, 1, 1, 1, 0, 0}), cls({0, 0, 1, 1, 1, 0}),
                  cls({0, 0, 0, 0, 1, 1})},
                 random_kernel(5), {}, 100000, 1});
  out.push_back({"fig5-designed-2class-zero", 3,
                 {cls({1, 1, 0}, {}, plain), cls({0, 1, 1}, {}, plain)},
                 designed_kernel(2), {}, 100000, 1});
  out.push_back({"fig6-designed-2class-nonzero", 3,
                 {cls({1, 1, 0}, {0.328, 0.264, 0.114}, plain),
                  cls({1, 1, 0}, {1, 1, 1}, plain)},
                 designed_kernel(1), {}, 100000, 1});
  out.push_back({"fig7-designed-3class", 3,
                 {cls({1, 0, 0}, {}, plain), cls({1, 1, 0}, {}, plain),
                  cls({0, 1, 1}, {}, plain)},
                 designed_kernel(2), {}, 100000, 1});
  out.push_back({"scalar-sanity", 1, {cls({1}, {}, plain), cls({3}, {}, plain)},
                 random_kernel(1), {}, 100000, 1});
  return out;
}

inline ScenarioConfig find_scenario(const std::string& name) {
  for (auto& c : builtin_scenarios()) {
    if (c.name == name) return c;
  }
  throw InvalidInput("unknown scenario '" + name + "' (see `list`)");
}

// ---- CSV ----

inline constexpr const char* kCsvHeader =
    "scenario,kernel,M,snr_db,sigma2,perr_mc,ci_low,ci_high,perr_ub,n_trials,seed";

struct CsvRow {
  std::string scenario;
  std::string kernel;
  Index m = 0;
  double snr_db = 0.0;
  double sigma2 = 0.0;
  double perr_mc = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double perr_ub = 0.0;
  std::uint64_t n_trials = 0;
  std::uint64_t seed = 0;
};

/// Header plus one row per sweep point; reals in 17-significant-digit
/// scientific notation. The seed column holds the point's derived seed.
inline void write_csv(std::ostream& os, const SweepResult& r) {
  os << kCsvHeader << '\n';
  os << std::scientific << std::setprecision(16);
  for (const auto& rec : r.records) {
    os << r.scenario << ',' << r.kernel << ',' << r.m << ',' << rec.snr_db << ',' << rec.sigma2
       << ',' << rec.estimate.p_err << ',' << rec.estimate.ci_low << ',' << rec.estimate.ci_high
       << ',' << rec.union_bound << ',' << rec.estimate.n_trials << ',' << rec.estimate.seed
       << '\n';
  }
  os << std::defaultfloat;
}

inline std::vector<CsvRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw InvalidInput("CSV header does not match the expected columns");
  std::vector<CsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) {
      throw InvalidInput("CSV line " + std::to_string(line_no) + " does not have 11 fields");
    }
    try {
      CsvRow r;
      r.scenario = f[0];
      r.kernel = f[1];
      r.m = std::stol(f[2]);
      r.snr_db = std::stod(f[3]);
      r.sigma2 = std::stod(f[4]);
      r.perr_mc = std::stod(f[5]);
      r.ci_low = std::stod(f[6]);
      r.ci_high = std::stod(f[7]);
      r.perr_ub = std::stod(f[8]);
      r.n_trials = std::stoull(f[9]);
      r.seed = std::stoull(f[10]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidInput("CSV line " + std::to_string(line_no) + " has a malformed number");
    }
  }
  return rows;
}

// ---- Curve summaries shared by `run` and `analyze` ----

struct CurveSummary {
  /// Asymptote fit of the bound over its two lowest decades of sigma^2.
  std::optional<AsymptoteFit> bound_fit;
  /// Least-squares slope of log perr_mc against log sigma^2 over points with
  /// at least one error.
  std::optional<double> mc_slope;
  std::size_t mc_points = 0;
};

inline CurveSummary summarize_curve(const std::vector<CsvRow>& rows) {
  CurveSummary s;
  std::vector<std::pair<double, double>> curve;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& r : rows) {
    if (r.perr_ub > 0.0) curve.emplace_back(r.sigma2, std::log(r.perr_ub));
    if (r.perr_mc > 0.0) {
      x.push_back(std::log(r.sigma2));
      y.push_back(std::log(r.perr_mc));
    }
  }
  try {
    s.bound_fit = fit_asymptote_log(curve);
  } catch (const InvalidInput&) {
    // Grid too short for a fit; leave unset.
  }
  s.mc_points = x.size();
  if (x.size() >= 2) s.mc_slope = linear_fit(x, y).slope;
  return s;
}

inline std::vector<CsvRow> to_rows(const SweepResult& r) {
  std::stringstream ss;
  write_csv(ss, r);
  return read_csv(ss);
}

}  // namespace gmmcc
