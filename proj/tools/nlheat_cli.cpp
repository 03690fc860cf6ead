#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlheat/balancer.hpp"
#include "nlheat/config.hpp"
#include "nlheat/errors.hpp"
#include "nlheat/report.hpp"
#include "nlheat/scenarios.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

struct Overrides {
  std::string config_path;
  std::optional<int> nodes, n, p, m, steps, balance_interval;
  std::optional<std::string> dt, source_mode, out;
  bool allow_unstable = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--nodes", o.nodes, "simulated nodes");
  cmd->add_option("--n", o.n, "DPs per side");
  cmd->add_option("--p", o.p, "DPs per SD side");
  cmd->add_option("--m", o.m, "horizon in grid spacings");
  cmd->add_option("--steps", o.steps, "timesteps");
  cmd->add_option("--dt", o.dt, "timestep, or 'auto' for half the stable limit");
  cmd->add_option("--source-mode", o.source_mode, "discrete | refined");
  cmd->add_option("--balance-interval", o.balance_interval, "steps between balancing (0: off)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--allow-unstable", o.allow_unstable, "run with dt above the stable limit");
}

nlheat::AppConfig resolve(const Overrides& o) {
  nlheat::AppConfig cfg = o.config_path.empty() ? nlheat::AppConfig{} : nlheat::load_config(o.config_path);
  auto& run = cfg.run;
  if (o.nodes) run.nodes = *o.nodes;
  if (o.n) run.n = cfg.bench.n = *o.n;
  if (o.p) run.p = *o.p;
  if (o.m) run.m = cfg.bench.m = *o.m;
  if (o.steps) run.steps = cfg.bench.steps = *o.steps;
  if (o.balance_interval) run.balance_interval = *o.balance_interval;
  if (o.dt) {
    if (*o.dt == "auto") {
      run.dt.reset();
    } else {
      try {
        run.dt = std::stod(*o.dt);
      } catch (const std::exception&) {
        throw nlheat::ConfigError("--dt must be a number or 'auto'");
      }
    }
  }
  if (o.source_mode) {
    run.source_mode = nlheat::parse_source_mode(*o.source_mode);
    cfg.validate.source_mode = run.source_mode;
  }
  if (o.out) cfg.output = *o.out;
  if (o.allow_unstable) run.allow_unstable = true;
  return cfg;
}

int cmd_solve(const nlheat::AppConfig& cfg) {
  const nlheat::SimulationReport rep = nlheat::run_simulation(cfg.run);
  nlheat::write_simulation_outputs(rep, cfg.output);
  double total = 0.0;
  for (const auto& r : rep.errors) total += r.error;
  std::cout << "steps=" << rep.steps_run << " dt=" << nlheat::format_double(rep.dt)
            << " total_error=" << nlheat::format_double(total) << " wall_s="
            << nlheat::format_double(rep.wall_seconds) << '\n';
  return kOk;
}

int cmd_validate(const nlheat::AppConfig& cfg) {
  const nlheat::ValidateResult res = nlheat::run_validate(cfg.validate);
  nlheat::write_text(std::filesystem::path(cfg.output) / "errors.csv", nlheat::validate_csv(res));
  for (const auto& r : res.rows) {
    std::cout << "h=1/" << r.n << " m=" << r.m << " e=" << nlheat::format_double(r.error) << '\n';
  }
  if (!res.passed) {
    std::cerr << "validate: " << res.message << '\n';
    return kFailed;
  }
  return kOk;
}

int cmd_bench(nlheat::AppConfig cfg, const std::optional<std::string>& mode) {
  if (mode) cfg.bench.mode = nlheat::parse_bench_mode(*mode);
  const nlheat::BenchResult res = nlheat::run_bench(cfg.bench);
  const std::filesystem::path dir(cfg.output);
  nlheat::write_text(dir / "speedup.csv", nlheat::bench_csv(res));
  nlheat::write_text(dir / "speedup.svg", nlheat::bench_svg(res));
  std::cout << nlheat::bench_csv(res);
  return kOk;
}

int cmd_balance_demo(const nlheat::AppConfig& cfg) {
  const nlheat::DemoResult res = nlheat::run_balance_demo(cfg.demo, cfg.run);
  const std::filesystem::path dir(cfg.output);
  nlheat::write_balance_csv(dir / "balance.csv", res.report.balance);
  nlheat::write_ownership_csv(dir / "ownership.csv", res.report.ownership);
  std::string plans = "[";
  for (std::size_t i = 0; i < res.report.balance.size(); ++i) {
    plans += (i ? ",\n" : "\n") + nlheat::to_json(res.report.balance[i].plan);
  }
  plans += "\n]\n";
  nlheat::write_text(dir / "plans.json", plans);
  for (std::size_t it = 0; it < res.report.ownership.size(); ++it) {
    std::cout << "iteration " << it << ": counts";
    for (int c : res.report.ownership[it].counts()) std::cout << ' ' << c;
    std::cout << '\n';
  }
  std::cout << res.message << '\n';
  return res.passed ? kOk : kFailed;
}

int cmd_partition(const nlheat::AppConfig& cfg) {
  const nlheat::PartitionResult res = nlheat::run_partition(cfg.run);
  nlheat::write_partition_csv(std::filesystem::path(cfg.output) / "partition.csv", res.pmap);
  std::cout << "sizes";
  for (int s : res.sizes) std::cout << ' ' << s;
  std::cout << "\ncut=" << res.cut << " striping_cut=" << res.striping_cut
            << " contiguous=" << (res.contiguous ? "yes" : "no") << '\n';
  return res.contiguous ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed nonlocal heat solver on a simulated cluster"};
  app.require_subcommand(1);
  Overrides o;
  std::optional<std::string> bench_mode;

  auto* validate = app.add_subcommand("validate", "mesh-refinement study against the manufactured solution");
  auto* solve = app.add_subcommand("solve", "run one simulation and write its reports");
  auto* bench = app.add_subcommand("bench", "strong or weak scaling measurement");
  auto* demo = app.add_subcommand("balance-demo", "load balancing from an imbalanced start");
  auto* partition = app.add_subcommand("partition", "partition the SD grid over the nodes");
  for (auto* cmd : {validate, solve, bench, demo, partition}) add_common(cmd, o);
  bench->add_option("--mode", bench_mode, "strong | weak");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const nlheat::AppConfig cfg = resolve(o);
    if (*validate) return cmd_validate(cfg);
    if (*solve) return cmd_solve(cfg);
    if (*bench) return cmd_bench(cfg, bench_mode);
    if (*demo) return cmd_balance_demo(cfg);
    if (*partition) return cmd_partition(cfg);
  } catch (const nlheat::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kConfigError;
}
