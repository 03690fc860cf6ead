#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlheat/runtime.hpp"

namespace nlheat {

struct ValidateSettings {
  std::vector<int> n{4, 8, 16, 32, 64};
  // Horizon held fixed; m = epsilon * n. Below m = 4 the lattice disk misses
  // the second moment by 10% or more, so the coarsest mesh sets epsilon.
  double epsilon = 1.0;
  std::vector<int> m;  // explicit horizon per mesh; overrides epsilon
  double conductivity = 8.0;
  double final_time = 0.25;
  double dt_fraction = 0.5;  // of stable_dt at the finest mesh
  SourceMode source_mode = SourceMode::refined;
};

enum class BenchMode { strong, weak };

struct BenchSettings {
  BenchMode mode = BenchMode::strong;
  int n = 400;
  int m = 8;
  int steps = 20;
  std::vector<int> sd_counts{1, 4, 16, 64};
  std::vector<int> workers{1, 2, 4};
  int weak_p = 50;
  int weak_max_tiles = 8;
};

struct DemoSettings {
  int n = 100;
  int p = 20;
  int m = 4;
  std::vector<int> start_counts{1, 16, 4, 4};
  int max_iterations = 10;
  int required_iterations = 3;
};

// Everything a subcommand needs. `run` carries the mesh, model, time and
// cluster sections; the others are per-subcommand.
struct AppConfig {
  RunConfig run;
  ValidateSettings validate;
  BenchSettings bench;
  DemoSettings demo;
  unsigned seed = 1;
  std::string output = "out";
};

// Parses a JSON document; unknown keys are rejected. Throws ConfigError.
AppConfig parse_config(std::string_view text);
AppConfig load_config(const std::string& path);

SourceMode parse_source_mode(std::string_view name);
std::string_view to_string(SourceMode mode);
BenchMode parse_bench_mode(std::string_view name);
BusyModel parse_busy_model(std::string_view name);

}  // namespace nlheat
