// magtun: configuration-driven runner for spectra, hopping and splitting
// computations, parameter sweeps, verification suites and plots.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>

#include "commands.hpp"

using namespace magtun::cli;

int main(int argc, char** argv) {
  CLI::App app{"magnetic double-well tunneling toolkit"};
  app.set_version_flag("--version", std::string(magtun::kVersion));
  std::string config_path, out_dir, log_level = "info";
  unsigned long long seed = 0;
  int threads = 0, grid_n = 0;
  double grid_L = 0.0;
  app.add_option("--config", config_path, "YAML run config")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--grid-n", grid_n, "square grid with this many nodes per side")->check(CLI::Range(3, 100000));
  app.add_option("--grid-L", grid_L, "square grid half width")->check(CLI::PositiveNumber);
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.require_subcommand(1);

  using Cmd = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Cmd>> commands = {
      {"spectrum", "lowest eigenpairs of the double-well operator", cmd_spectrum},
      {"hopping", "hopping coefficient from the single-well ground state", cmd_hopping},
      {"splitting", "direct ground-pair splitting, optionally the 2x2 quasimode reduction", cmd_splitting},
      {"mho-check", "oscillator closed forms against grid and quadrature oracles", cmd_mho_check},
      {"landau-check", "Landau kernels, resolvent residual and decay rates", cmd_landau_check},
      {"blaschke-check", "Blaschke, Herglotz and certificate property suite", cmd_blaschke_check},
      {"partition-check", "dyadic partition of unity report", cmd_partition_check},
      {"sweep", "splitting and hopping over the (lambda, b, d1) grid", cmd_sweep},
      {"plot", "SVG plots from a results directory", cmd_plot},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  auto logger = spdlog::stderr_color_mt("magtun");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  return guarded([&] {
    RunConfig cfg = load_config(config_path);
    if (*out_opt) cfg.out_dir = out_dir;
    if (*seed_opt) cfg.seed = seed;
    if (threads > 0) cfg.threads = threads;
    if (grid_n > 0) cfg.grid_n = grid_n;
    if (grid_L > 0.0) cfg.grid_L = grid_L;
    cfg.validate();
    for (const auto& [name, help, fn] : commands)
      if (app.got_subcommand(name)) return fn(cfg, std::cout);
    return int(kConfigError);
  });
}
