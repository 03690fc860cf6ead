#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "nlheat/balancer.hpp"
#include "nlheat/kernel.hpp"
#include "nlheat/mesh.hpp"
#include "nlheat/partition_map.hpp"
#include "nlheat/trace.hpp"

namespace nlheat {

// Extra latency on messages from one node to another.
struct LinkDelay {
  int from = 0;
  int to = 0;
  std::chrono::milliseconds delay{0};
};

// Busy time fed to the balancer: measured per-thread CPU time, or the
// synthetic value count_i * s_i.
enum class BusyModel { measured, synthetic };

struct RunConfig {
  int n = 16;
  int p = 4;
  int m = 2;
  double conductivity = 1.0;
  std::optional<double> dt;  // empty: 0.5 * stable_dt
  int steps = 10;
  int nodes = 1;
  std::vector<int> capacity;  // work multiplier per node, >= 1; empty means all 1
  int balance_interval = 0;   // 0 disables balancing
  SourceMode source_mode = SourceMode::discrete;
  bool allow_unstable = false;

  std::optional<PartitionMap> ownership;  // empty: partition_kway over the nodes
  BusyModel busy_model = BusyModel::measured;
  bool stop_when_balanced = false;  // end the run at the first empty plan
  bool record_errors = true;
  bool trace = true;

  std::vector<LinkDelay> delays;
  // Returning true discards the ghost message (sd, from, to) of `step`.
  std::function<bool(int step, int sd, int from, int to)> drop;
  // Plans applied at the boundary before the keyed step.
  std::map<int, TransferPlan> scripted_transfers;
};

struct PerfCounter {
  double busy = 0.0;   // seconds of compute since reset
  double total = 0.0;  // wall seconds since reset
};

struct StepRecord {
  int step = 0;  // field index after the update
  double t = 0.0;
  double error = 0.0;
};

struct BalanceRecord {
  int iteration = 0;
  int step = 0;  // steps completed when balancing ran
  std::vector<int> counts;
  std::vector<double> busy;
  std::vector<double> total;
  std::vector<double> busy_fraction;  // busy / total; synthetic: busy / max busy
  std::vector<double> power;
  std::vector<double> imbalance;
  TransferPlan plan;
};

struct SimulationReport {
  double dt = 0.0;
  int steps_run = 0;
  std::vector<StepRecord> errors;
  std::vector<BalanceRecord> balance;
  std::vector<PartitionMap> ownership;  // initial, then after each balancing
  std::vector<double> step_seconds;     // wall time per step
  double wall_seconds = 0.0;
  Field field;  // final field gathered from the owners
  std::shared_ptr<EventTrace> trace;
};

// Resolves "auto" and checks the stability bound. Throws ConfigError.
double resolve_dt(const RunConfig& config);

// Validates the configuration without running anything. Throws ConfigError.
void validate(const RunConfig& config);

class Cluster {
 public:
  explicit Cluster(RunConfig config);
  ~Cluster();
  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  // Runs `count` timesteps. Throws RuntimeFault on a protocol failure.
  void advance(int count);

  // Timestep-boundary operations.
  void apply_transfers(const TransferPlan& plan);
  std::vector<PerfCounter> read_counters() const;
  void reset_counters();
  Field gather() const;

  const PartitionMap& ownership() const;
  const SdGrid& grid() const;
  int step() const;
  double dt() const;
  std::shared_ptr<EventTrace> trace() const;
  const std::vector<StepRecord>& errors() const;
  const std::vector<double>& step_seconds() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Full run: steps with balancing every `balance_interval` steps (read
// counters, plan, apply, reset).
SimulationReport run_simulation(const RunConfig& config);

}  // namespace nlheat
