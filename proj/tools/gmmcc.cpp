// gmmcc: scenario runner for compressive classification experiments.
//
//   gmmcc list [--dump DIR]
//   gmmcc run --scenario NAME | --config FILE [--m M] [--kernel random|designed]
//             [--trials T] [--seed S] [--kernel-seed S] [--snr A:B:STEP]
//             [--out FILE] [--threads N]
//   gmmcc design --scenario NAME | --config FILE [--m M]
//   gmmcc analyze --in FILE

#include <exception>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

void add_selection(CLI::App* app, gmmcc::cli::Selection& sel) {
  auto* s = app->add_option("--scenario", sel.scenario, "built-in scenario name");
  auto* c = app->add_option("--config", sel.config_path, "scenario config file (JSON)");
  s->excludes(c);
  c->excludes(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive classification of Gaussian mixtures: bounds and Monte Carlo sweeps"};
  app.require_subcommand(1);

  std::string dump_dir;
  auto* list = app.add_subcommand("list", "list built-in scenarios");
  list->add_option("--dump", dump_dir, "also write each built-in as DIR/<name>.json");

  gmmcc::cli::RunOptions run_opts;
  auto* run = app.add_subcommand("run", "run an SNR sweep and write a CSV");
  add_selection(run, run_opts.selection);
  run->add_option("--m", run_opts.m, "number of measurements");
  run->add_option("--kernel", run_opts.kernel, "random or designed");
  run->add_option("--trials", run_opts.trials, "Monte Carlo trials per SNR point");
  run->add_option("--seed", run_opts.seed, "master Monte Carlo seed");
  run->add_option("--kernel-seed", run_opts.kernel_seed, "seed of the random kernel");
  run->add_option("--snr", run_opts.snr, "SNR grid START:STOP:STEP in dB");
  run->add_option("--out", run_opts.out, "output CSV path");
  run->add_option("--threads", run_opts.threads, "worker threads across SNR points");

  gmmcc::cli::Selection design_sel;
  std::optional<gmmcc::Index> design_m;
  auto* design = app.add_subcommand("design", "print a designed kernel and its pair geometry");
  add_selection(design, design_sel);
  design->add_option("--m", design_m, "measurement budget");

  std::string analyze_in;
  auto* analyze = app.add_subcommand("analyze", "fit slope and gain on an existing CSV");
  analyze->add_option("--in", analyze_in, "CSV produced by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) return gmmcc::cli::cmd_list(std::cout, dump_dir);
    if (run->parsed()) return gmmcc::cli::cmd_run(std::cout, run_opts);
    if (design->parsed()) return gmmcc::cli::cmd_design(std::cout, design_sel, design_m);
    if (analyze->parsed()) return gmmcc::cli::cmd_analyze(std::cout, analyze_in);
  } catch (const gmmcc::DesignImpossible& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
