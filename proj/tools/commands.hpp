#pragma once

// Subcommand bodies for the gmmcc CLI, kept apart from argument parsing so
// the tests can drive them with string streams.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>

#include "gmmcc/gmmcc.hpp"

namespace gmmcc::cli {

struct Selection {
  std::string scenario;
  std::string config_path;
};

inline ScenarioConfig select(const Selection& s) {
  if (!s.config_path.empty()) return load_scenario(s.config_path);
  if (!s.scenario.empty()) return find_scenario(s.scenario);
  throw InvalidInput("pass --scenario NAME or --config FILE");
}

struct RunOptions {
  Selection selection;
  std::optional<Index> m;
  std::optional<std::string> kernel;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> kernel_seed;
  std::optional<std::string> snr;
  std::string out;
  unsigned threads = 1;
};

inline ScenarioConfig apply_overrides(ScenarioConfig c, const RunOptions& o) {
  if (o.m) c.kernel.m = *o.m;
  if (o.kernel) c.kernel.type = parse_kernel_type(*o.kernel);
  if (o.trials) {
    if (*o.trials < 1) throw InvalidInput("trials must be >= 1");
    c.trials = static_cast<std::uint64_t>(*o.trials);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.kernel_seed) c.kernel.seed = *o.kernel_seed;
  if (o.snr) c.snr = parse_snr_grid(*o.snr);
  validate(c);
  return c;
}

inline std::string default_csv_name(const ScenarioConfig& c) {
  return c.name + "_" + to_string(c.kernel.type) + "_M" + std::to_string(c.kernel.m) + ".csv";
}

inline void print_pair_geometry(std::ostream& os, const MeasurementKernel& k, const GmmSource& src) {
  for (std::size_t i = 0; i + 1 < src.num_classes(); ++i) {
    for (std::size_t j = i + 1; j < src.num_classes(); ++j) {
      const PairGeometry sg = pair_geometry(src, i, j);
      const ProjectedPairGeometry pg = projected_pair_geometry(k, src, i, j);
      os << "# pair (" << i + 1 << "," << j + 1 << "): source r=(" << sg.r_si << "," << sg.r_sj
         << "," << sg.r_sij << ") NO_Dim=" << sg.no_dim << "; projected r=(" << pg.r_i << ","
         << pg.r_j << "," << pg.r_ij << ") v=(" << pg.v_i << "," << pg.v_j << "," << pg.v_ij
         << "); " << asymptotic_pair(k, src, i, j).to_string() << '\n';
    }
  }
}

inline int cmd_list(std::ostream& os, const std::string& dump_dir) {
  for (const auto& c : builtin_scenarios()) {
    os << std::left << std::setw(30) << c.name << " L=" << c.classes.size() << " N=" << c.dim
       << " kernel=" << to_string(c.kernel.type) << " M=" << c.kernel.m << '\n';
    if (!dump_dir.empty()) {
      std::filesystem::create_directories(dump_dir);
      const auto path = std::filesystem::path(dump_dir) / (c.name + ".json");
      std::ofstream f(path);
      if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
      f << to_json(c).dump(2) << '\n';
    }
  }
  return 0;
}

inline void print_summary(std::ostream& os, const CurveSummary& s) {
  if (s.bound_fit) {
    os << "fit: d_hat=" << s.bound_fit->d_hat;
    if (s.bound_fit->g_m_hat) os << " g_m_hat=" << *s.bound_fit->g_m_hat;
    if (s.bound_fit->floor) os << " (flat: error floor)";
    os << '\n';
  } else {
    os << "fit: unavailable (grid must span two decades of sigma^2)\n";
  }
  if (s.mc_slope) {
    os << "mc_slope: " << *s.mc_slope << " over " << s.mc_points << " points\n";
  } else {
    os << "mc_slope: unavailable (fewer than two points with errors)\n";
  }
}

inline int cmd_run(std::ostream& os, const RunOptions& o) {
  const ScenarioConfig c = apply_overrides(select(o.selection), o);
  const GmmSource src = build_source(c);
  const MeasurementKernel k = build_kernel(c, src);
  os << std::setprecision(10);
  os << "scenario: " << c.name << '\n';
  os << "kernel: " << k.describe() << '\n';
  os << "profile: " << multiclass_asymptotics(k, src).to_string() << '\n';

  const SweepResult r = snr_sweep(src, k, snr_grid(c.snr), c.trials, c.seed, c.name, o.threads);
  const std::string out = o.out.empty() ? default_csv_name(c) : o.out;
  {
    std::ofstream f(out);
    if (!f) throw InvalidInput("cannot write CSV '" + out + "'");
    write_csv(f, r);
    if (!f) throw InvalidInput("failed while writing CSV '" + out + "'");
  }
  print_summary(os, summarize_curve(to_rows(r)));
  os << "wrote: " << out << " (" << r.records.size() << " rows)\n";
  return 0;
}

inline int cmd_design(std::ostream& os, const Selection& sel, std::optional<Index> m) {
  ScenarioConfig c = select(sel);
  if (m) c.kernel.m = *m;
  validate(c);
  const GmmSource src = build_source(c);
  const MeasurementKernel k = design_kernel(src, c.kernel.m);
  os << "# scenario: " << c.name << '\n';
  os << "# kernel: " << k.describe() << '\n';
  os << std::scientific << std::setprecision(16);
  for (Index r = 0; r < k.m(); ++r) {
    for (Index col = 0; col < k.n(); ++col) os << (col ? "," : "") << k.phi(r, col);
    os << '\n';
  }
  os << std::defaultfloat << std::setprecision(10);
  print_pair_geometry(os, k, src);
  return 0;
}

inline int cmd_analyze(std::ostream& os, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open CSV '" + path + "'");
  const auto rows = read_csv(f);
  if (rows.empty()) throw InvalidInput("CSV has no data rows");
  os << std::setprecision(10);
  os << "rows: " << rows.size() << " scenario: " << rows.front().scenario
     << " kernel: " << rows.front().kernel << " M=" << rows.front().m << '\n';
  print_summary(os, summarize_curve(rows));
  return 0;
}

}  // namespace gmmcc::cli
