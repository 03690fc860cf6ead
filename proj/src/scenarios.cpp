#include "nlheat/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "nlheat/errors.hpp"
#include "nlheat/partition.hpp"
#include "nlheat/report.hpp"

namespace nlheat {

ValidateResult run_validate(const ValidateSettings& s) {
  if (s.source_mode != SourceMode::refined) {
    throw ConfigError("validate needs the refined source mode; the discrete source hides spatial error");
  }
  if (s.n.empty()) throw ConfigError("validate needs at least one mesh size");
  if (!(s.final_time > 0.0)) throw ConfigError("validate.final_time must be positive");
  if (!(s.dt_fraction > 0.0) || s.dt_fraction > 1.0) {
    throw ConfigError("validate.dt_fraction must lie in (0, 1]");
  }
  std::vector<int> ms = s.m;
  if (!ms.empty()) {
    if (ms.size() != s.n.size() || std::any_of(ms.begin(), ms.end(), [](int m) { return m < 1; })) {
      throw ConfigError("validate.m needs one horizon >= 1 per mesh size");
    }
  }
  for (int n : s.n) {
    if (!s.m.empty()) break;
    const double m = s.epsilon * n;
    if (n < 1 || m < 1.0 || std::abs(m - std::round(m)) > 1e-9) {
      throw ConfigError("epsilon=" + format_double(s.epsilon) + " is not a whole number (>= 1) of grid spacings at n=" +
                        std::to_string(n));
    }
    ms.push_back(static_cast<int>(std::lround(m)));
  }

  const auto finest = static_cast<std::size_t>(std::max_element(s.n.begin(), s.n.end()) - s.n.begin());
  RunConfig probe;
  probe.n = s.n[finest];
  probe.p = probe.n;
  probe.m = ms[finest];
  probe.conductivity = s.conductivity;
  const double limit = 2.0 * resolve_dt(probe);
  const int steps = static_cast<int>(std::ceil(s.final_time / (s.dt_fraction * limit) - 1e-9));
  const double dt = s.final_time / steps;

  ValidateResult result;
  for (std::size_t i = 0; i < s.n.size(); ++i) {
    RunConfig run;
    run.n = s.n[i];
    run.p = s.n[i];
    run.m = ms[i];
    run.conductivity = s.conductivity;
    run.dt = dt;
    run.steps = steps;
    run.source_mode = SourceMode::refined;
    run.trace = false;
    const SimulationReport rep = run_simulation(run);
    double total = 0.0;
    for (const StepRecord& r : rep.errors) total += r.error;
    result.rows.push_back({run.n, run.m, 1.0 / run.n, dt, steps, total});
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (!(result.rows[i].error < result.rows[i - 1].error)) {
      result.passed = false;
      result.message = "error did not decrease from h=1/" + std::to_string(result.rows[i - 1].n) +
                       " (e=" + format_double(result.rows[i - 1].error) + ") to h=1/" +
                       std::to_string(result.rows[i].n) + " (e=" + format_double(result.rows[i].error) + ")";
      break;
    }
  }
  return result;
}

std::string validate_csv(const ValidateResult& result) {
  std::ostringstream out;
  out << "h,n,m,dt,steps,e\n";
  for (const ValidateRow& r : result.rows) {
    out << format_double(r.h) << ',' << r.n << ',' << r.m << ',' << format_double(r.dt) << ','
        << r.steps << ',' << format_double(r.error) << '\n';
  }
  return out.str();
}

namespace {

double timed_run(int n, int p, int m, int steps, int workers) {
  RunConfig run;
  run.n = n;
  run.p = p;
  run.m = m;
  run.steps = steps;
  run.nodes = workers;
  run.record_errors = false;
  run.trace = false;
  const SimulationReport rep = run_simulation(run);
  return std::accumulate(rep.step_seconds.begin(), rep.step_seconds.end(), 0.0);
}

std::string core_note(int workers) {
  const unsigned cores = std::thread::hardware_concurrency();
  if (cores != 0 && static_cast<unsigned>(workers) > cores) {
    return "oversubscribed: " + std::to_string(workers) + " workers on " + std::to_string(cores) + " cores";
  }
  return "";
}

}  // namespace

BenchResult run_bench(const BenchSettings& s) {
  BenchResult result;
  result.mode = s.mode;
  if (s.steps < 1) throw ConfigError("bench.steps must be >= 1");
  if (std::find(s.workers.begin(), s.workers.end(), 1) == s.workers.end()) {
    throw ConfigError("bench.workers must include the 1-worker baseline");
  }
  std::vector<std::pair<int, int>> meshes;  // (n, tiles per side)
  if (s.mode == BenchMode::strong) {
    for (int count : s.sd_counts) {
      const int tiles = static_cast<int>(std::lround(std::sqrt(count)));
      if (count < 1 || tiles * tiles != count || s.n % tiles != 0) {
        throw ConfigError("SD count " + std::to_string(count) + " is not a square tiling of n=" +
                          std::to_string(s.n));
      }
      meshes.emplace_back(s.n, tiles);
    }
  } else {
    for (int t = 1; t <= s.weak_max_tiles; ++t) meshes.emplace_back(s.weak_p * t, t);
  }

  for (const auto& [n, tiles] : meshes) {
    double baseline = 0.0;
    std::vector<int> workers = s.workers;
    std::sort(workers.begin(), workers.end());
    for (int w : workers) {
      if (w > tiles * tiles) continue;
      const double secs = timed_run(n, n / tiles, s.m, s.steps, w);
      if (w == 1) baseline = secs;
      BenchRow row{w, tiles * tiles, n, secs, 0.0, 0.0, core_note(w)};
      row.speedup = w == 1 ? 1.0 : baseline / secs;
      row.efficiency = row.speedup / w;
      result.rows.push_back(row);
    }
  }
  return result;
}

std::string bench_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "workers,sd_count,n,seconds,speedup,efficiency,note\n";
  for (const BenchRow& r : result.rows) {
    out << r.workers << ',' << r.sd_count << ',' << r.n << ',' << format_double(r.seconds) << ','
        << format_double(r.speedup) << ',' << format_double(r.efficiency) << ',' << r.note << '\n';
  }
  return out.str();
}

std::string bench_svg(const BenchResult& result) {
  std::map<std::pair<int, int>, PlotSeries> by_mesh;
  for (const BenchRow& r : result.rows) {
    auto& s = by_mesh[{r.n, r.sd_count}];
    s.label = result.mode == BenchMode::strong ? std::to_string(r.sd_count) + " SDs"
                                               : std::to_string(r.n) + "x" + std::to_string(r.n);
    s.x.push_back(r.workers);
    s.y.push_back(r.speedup);
  }
  std::vector<PlotSeries> series;
  for (auto& [_, s] : by_mesh) series.push_back(std::move(s));
  const std::string title = result.mode == BenchMode::strong ? "Strong scaling" : "Weak scaling (p fixed)";
  return render_svg(title, "workers", "speedup", series);
}

PartitionMap scripted_layout(int tiles_per_side, std::span<const int> counts) {
  const int total = tiles_per_side * tiles_per_side;
  if (tiles_per_side < 1 || std::accumulate(counts.begin(), counts.end(), 0) != total ||
      std::any_of(counts.begin(), counts.end(), [](int c) { return c < 1; })) {
    throw ConfigError("start counts must be positive and sum to " + std::to_string(total));
  }
  std::vector<int> owners(static_cast<std::size_t>(total));
  std::size_t at = 0;
  for (std::size_t node = 0; node < counts.size(); ++node) {
    for (int c = 0; c < counts[node]; ++c, ++at) {
      const int row = static_cast<int>(at) / tiles_per_side;
      const int col = static_cast<int>(at) % tiles_per_side;
      const int x = row % 2 == 0 ? col : tiles_per_side - 1 - col;
      owners[static_cast<std::size_t>(row * tiles_per_side + x)] = static_cast<int>(node);
    }
  }
  return PartitionMap(std::move(owners), static_cast<int>(counts.size()));
}

bool is_balanced(std::span<const int> counts, std::span<const int> capacity) {
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) sum += 1.0 / (capacity.empty() ? 1 : capacity[i]);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = total * (1.0 / (capacity.empty() ? 1 : capacity[i])) / sum;
    if (std::abs(counts[i] - e) > 1.0 + 1e-9) return false;
  }
  return true;
}

DemoResult run_balance_demo(const DemoSettings& s, const RunConfig& base) {
  const SdGrid grid = build_grid(s.n, s.p, s.m);
  if (s.max_iterations < 1) throw ConfigError("balance_demo.max_iterations must be >= 1");
  RunConfig run = base;
  run.n = s.n;
  run.p = s.p;
  run.m = s.m;
  run.nodes = static_cast<int>(s.start_counts.size());
  run.dt.reset();
  run.ownership = scripted_layout(grid.sx(), s.start_counts);
  if (run.balance_interval <= 0) run.balance_interval = 5;
  run.steps = run.balance_interval * s.max_iterations;
  run.stop_when_balanced = true;
  run.source_mode = SourceMode::discrete;

  DemoResult result;
  result.report = run_simulation(run);
  const DualGraph graph = build_dual_graph(grid);
  for (std::size_t it = 0; it < result.report.ownership.size(); ++it) {
    const PartitionMap& own = result.report.ownership[it];
    for (int node = 0; node < own.nodes(); ++node) {
      result.contiguous = result.contiguous && is_contiguous(graph, own, node);
    }
    if (result.iterations_to_balance < 0 && is_balanced(own.counts(), run.capacity)) {
      result.iterations_to_balance = static_cast<int>(it);
    }
  }
  std::ostringstream msg;
  if (result.iterations_to_balance < 0) {
    msg << "no balanced distribution within " << s.max_iterations << " iterations";
  } else if (result.iterations_to_balance > s.required_iterations) {
    msg << "balanced only after " << result.iterations_to_balance << " iterations (limit "
        << s.required_iterations << ")";
  } else if (!result.contiguous) {
    msg << "a sub-problem became non-contiguous";
  } else {
    msg << "balanced after " << result.iterations_to_balance << " iteration(s)";
  }
  result.passed = result.iterations_to_balance >= 0 &&
                  result.iterations_to_balance <= s.required_iterations && result.contiguous;
  result.message = msg.str();
  return result;
}

PartitionResult run_partition(const RunConfig& config) {
  const SdGrid grid = build_grid(config.n, config.p, config.m);
  const DualGraph graph = build_dual_graph(grid);
  PartitionResult r{partition_kway(graph, config.nodes), 0, 0, {}, true};
  r.cut = edge_cut(graph, r.pmap);
  r.striping_cut = edge_cut(graph, row_striping(graph, config.nodes));
  r.sizes = r.pmap.counts();
  for (int node = 0; node < config.nodes; ++node) {
    r.contiguous = r.contiguous && is_contiguous(graph, r.pmap, node);
  }
  return r;
}

void write_simulation_outputs(const SimulationReport& report, const std::filesystem::path& dir) {
  write_errors_csv(dir / "errors.csv", report.errors);
  write_balance_csv(dir / "balance.csv", report.balance);
  write_ownership_csv(dir / "ownership.csv", report.ownership);
  if (report.trace) write_trace_jsonl(dir / "trace.jsonl", *report.trace);
  write_field_csv(dir / "field.csv", report.field);
}

}  // namespace nlheat
