#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nlheat/config.hpp"
#include "nlheat/runtime.hpp"

namespace nlheat {

struct ValidateRow {
  int n = 0;
  int m = 0;
  double h = 0.0;
  double dt = 0.0;
  int steps = 0;
  double error = 0.0;  // sum over steps of e^k
};

struct ValidateResult {
  std::vector<ValidateRow> rows;
  bool passed = true;
  std::string message;
};

// h-sweep with the horizon fixed and dt taken from the finest mesh.
// Throws ConfigError for the discrete source mode or an epsilon that is not
// a whole number of grid spacings.
ValidateResult run_validate(const ValidateSettings& settings);
std::string validate_csv(const ValidateResult& result);

struct BenchRow {
  int workers = 0;
  int sd_count = 0;
  int n = 0;
  double seconds = 0.0;
  double speedup = 0.0;
  double efficiency = 0.0;
  std::string note;
};

struct BenchResult {
  BenchMode mode = BenchMode::strong;
  std::vector<BenchRow> rows;
};

BenchResult run_bench(const BenchSettings& settings);
std::string bench_csv(const BenchResult& result);
std::string bench_svg(const BenchResult& result);

// Contiguous start layout: SDs in boustrophedon row order cut into runs of the
// given sizes.
PartitionMap scripted_layout(int tiles_per_side, std::span<const int> counts);

struct DemoResult {
  SimulationReport report;
  int iterations_to_balance = -1;  // 0: already balanced at the start
  bool contiguous = true;
  bool passed = false;
  std::string message;
};

// Balancing run from the scripted start. Capacity factors, busy model and
// balance interval come from `base`.
DemoResult run_balance_demo(const DemoSettings& settings, const RunConfig& base);

// |count_i - E_i| <= 1 for every node, E from the capacity factors.
bool is_balanced(std::span<const int> counts, std::span<const int> capacity);

struct PartitionResult {
  PartitionMap pmap;
  long cut = 0;
  long striping_cut = 0;
  std::vector<int> sizes;
  bool contiguous = true;
};

PartitionResult run_partition(const RunConfig& config);

// errors.csv, balance.csv, ownership.csv, trace.jsonl and field.csv.
void write_simulation_outputs(const SimulationReport& report, const std::filesystem::path& dir);

}  // namespace nlheat
