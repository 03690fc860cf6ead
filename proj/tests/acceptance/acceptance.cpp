// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any asserted criterion fails; the scaling line is a report only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nlheat/balancer.hpp"
#include "nlheat/config.hpp"
#include "nlheat/kernel.hpp"
#include "nlheat/partition.hpp"
#include "nlheat/runtime.hpp"
#include "nlheat/scenarios.hpp"
#include "layouts.hpp"
#include "oracles.hpp"
#include "trace_checks.hpp"

using namespace nlheat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome convergence() {
  const auto start = Clock::now();
  const ValidateResult r = run_validate(ValidateSettings{});
  std::ostringstream d;
  bool ok = r.passed && r.rows.size() == 5;
  d << "e =";
  for (const ValidateRow& row : r.rows) d << ' ' << row.error;
  d << "; ratios =";
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const double ratio = r.rows[i - 1].error / r.rows[i].error;
    ok = ok && ratio > 1.05;
    d << ' ' << ratio;
  }
  d << "; " << seconds_since(start) << " s";
  return {ok, d.str()};
}

// Largest per-step squared error of a discrete-source run on n = 16, m = 2.
double max_step_error(double dt, int steps) {
  const DomainSpec spec(16, 2);
  const ModelParams params = make_model(1.0, spec);
  const FlatStencil flat = flatten(build_stencil(spec.m(), spec.h()), params, spec.padded());
  const ManufacturedSource source(spec, params, SourceMode::discrete);
  std::vector<DpIndex> all;
  for (int j = 0; j < spec.n(); ++j)
    for (int i = 0; i < spec.n(); ++i) all.push_back({i, j});
  Field cur = manufactured_initial(spec);
  Field next = cur;
  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    step_points(cur, next, all, k * dt, dt, source.as_function(), flat, params);
    std::swap(cur, next);
    worst = std::max(worst, error_l2(cur, (k + 1) * dt));
  }
  return worst;
}

Outcome time_order() {
  const double T = 0.1;
  const double coarse = max_step_error(T / 80, 80);
  const double fine = max_step_error(T / 160, 160);
  // e^k is a squared norm, so first order in dt shows as a factor 4 in e^k.
  const double ratio = std::sqrt(coarse / fine);
  std::ostringstream d;
  d << "sqrt(max e^k) ratio = " << ratio << " (max e^k ratio " << coarse / fine << ")";
  return {ratio >= 1.7 && ratio <= 2.3, d.str()};
}

Outcome serial_equivalence() {
  RunConfig c;
  c.n = 32;
  c.p = 8;
  c.m = 4;
  c.steps = 10;
  c.nodes = 4;
  c.dt = resolve_dt(c);
  const SimulationReport rep = run_simulation(c);
  oracle::Serial ref(32, 4, c.conductivity, *c.dt);
  ref.run(10);
  int mismatches = 0;
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i)
      if (rep.field(i, j) != ref.at(i, j)) ++mismatches;
  std::ostringstream d;
  d << mismatches << " of 1024 DPs differ after " << rep.steps_run << " steps on 4 nodes";
  return {mismatches == 0 && rep.steps_run == 10, d.str()};
}

std::string counts_str(const std::vector<int>& counts) {
  std::string s = "(";
  for (std::size_t i = 0; i < counts.size(); ++i) s += (i ? "," : "") + std::to_string(counts[i]);
  return s + ")";
}

Outcome load_balancing() {
  const auto start = Clock::now();
  const DemoResult r = run_balance_demo(DemoSettings{}, RunConfig{});
  const double secs = seconds_since(start);
  const auto counts = r.report.ownership.back().counts();
  bool in_range = true;
  for (int c : counts) in_range = in_range && (c == 6 || c == 7);
  std::ostringstream d;
  d << r.message << "; final counts " << counts_str(counts) << "; contiguous "
    << (r.contiguous ? "yes" : "no") << "; " << secs << " s";
  return {r.passed && in_range && r.iterations_to_balance <= 3 && r.contiguous && secs < 30.0, d.str()};
}

Outcome heterogeneous_balance() {
  RunConfig base;
  base.capacity = {1, 1, 2, 2};
  base.busy_model = BusyModel::synthetic;
  DemoSettings s;
  s.required_iterations = 5;
  const DemoResult r = run_balance_demo(s, base);
  const auto counts = r.report.ownership.back().counts();
  std::ostringstream d;
  d << "iterations " << r.iterations_to_balance << "; final counts " << counts_str(counts)
    << " (capacity factors are slowdowns, so power ~ 1/s)";
  return {r.iterations_to_balance >= 0 && r.iterations_to_balance <= 5 && r.contiguous &&
              is_balanced(counts, base.capacity),
          d.str()};
}

Outcome partition_quality() {
  bool ok = true;
  std::ostringstream d;
  const DualGraph g = build_dual_graph(build_grid(64, 4, 2));
  for (int k : {2, 4, 8}) {
    const PartitionMap pm = partition_kway(g, k);
    const auto sizes = pm.counts();
    const int spread = *std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end());
    bool contiguous = true;
    for (int part = 0; part < k; ++part) contiguous = contiguous && is_contiguous(g, pm, part);
    const long cut = edge_cut(g, pm);
    const long stripes = edge_cut(g, row_striping(g, k));
    ok = ok && contiguous && spread <= 1 && cut <= stripes;
    d << "k=" << k << " cut " << cut << " vs striping " << stripes << "; ";
  }
  const int n = 12, p = 4, m = 2;
  const DualGraph small = build_dual_graph(build_grid(n, p, m));
  long best = -1;
  for (int mask = 0; mask < (1 << 9); ++mask) {
    const int ones = __builtin_popcount(static_cast<unsigned>(mask));
    if (ones != 4 && ones != 5) continue;
    long cut = 0;
    for (int a = 0; a < 9; ++a)
      for (int b = a + 1; b < 9; ++b)
        if (((mask >> a) & 1) != ((mask >> b) & 1)) cut += oracle::ghost_volume(a, b, n, p, m);
    if (best < 0 || cut < best) best = cut;
  }
  const long cut = edge_cut(small, partition_kway(small, 2));
  ok = ok && 2 * cut <= 3 * best;
  d << "3x3/k=2 cut " << cut << " vs optimum " << best;
  return {ok, d.str()};
}

// Per node and step, wall time from the first Case-2 start to the last Case-2 end.
double min_case2_span(const EventTrace& trace, int nodes) {
  double shortest = 1e30;
  for (int node = 0; node < nodes; ++node) {
    std::map<int, std::pair<std::int64_t, std::int64_t>> span;
    for (const Event& e : trace.events_of(node)) {
      if (e.kind == EventKind::case2_start && !span.contains(e.step)) span[e.step] = {e.t_ns, e.t_ns};
      if (e.kind == EventKind::case2_end) span[e.step].second = e.t_ns;
    }
    for (const auto& [_, s] : span) shortest = std::min(shortest, (s.second - s.first) * 1e-9);
  }
  return shortest;
}

Outcome communication_hiding() {
  RunConfig c;
  c.n = 256;
  c.p = 128;
  c.m = 8;
  c.nodes = 2;
  c.steps = 7;
  c.capacity = {10, 10};
  c.record_errors = false;
  c.ownership = PartitionMap({0, 1, 0, 1}, 2);
  RunConfig delayed = c;
  const auto ms50 = std::chrono::milliseconds(50);
  delayed.delays = {{0, 1, ms50}, {1, 0, ms50}};

  std::vector<std::string> violations;
  double case2 = 1e30;
  // Fastest step of a run; the first step pays for thread start-up and cold
  // caches, and on a shared host other load only ever adds time.
  auto run = [&](const RunConfig& cfg) {
    Cluster cl(cfg);
    cl.advance(cfg.steps);
    const auto& tr = *cl.trace();
    for (auto& v : trace_checks::hiding_contract(tr, cl.grid(), cl.ownership())) violations.push_back(v);
    for (auto& v : trace_checks::case2_first(tr, cfg.nodes)) violations.push_back(v);
    case2 = std::min(case2, min_case2_span(tr, cfg.nodes));
    return *std::min_element(cl.step_seconds().begin() + 1, cl.step_seconds().end());
  };
  double base = 1e30, slow = 1e30;
  for (int rep = 0; rep < 3; ++rep) {
    base = std::min(base, run(c));
    slow = std::min(slow, run(delayed));
  }
  const double inflation = slow - base;

  std::ostringstream d;
  d << "fastest step " << base * 1e3 << " ms -> " << slow * 1e3 << " ms with 50 ms links (inflation "
    << inflation * 1e3 << " ms); shortest Case-2 span " << case2 * 1e3 << " ms; " << violations.size()
    << " trace violations";
  if (!violations.empty()) d << " (first: " << violations.front() << ")";
  return {violations.empty() && case2 >= 0.050 && inflation < 0.010, d.str()};
}

Outcome scaling_report() {
  BenchSettings s;
  s.sd_counts = {64};
  s.workers = {1, 4};
  const BenchResult r = run_bench(s);
  std::ostringstream d;
  for (const BenchRow& row : r.rows) {
    if (row.workers == 4) {
      d << "4-worker efficiency " << row.efficiency << " on 64 SDs, 400x400, m=8, 20 steps";
      if (!row.note.empty()) d << " [" << row.note << "]";
    }
  }
  d << "; host reports " << std::thread::hardware_concurrency() << " hardware thread(s)";
  return {true, d.str()};
}

double max_abs_gap(const std::vector<double>& expected, const std::vector<int>& counts) {
  double worst = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) worst = std::max(worst, std::abs(expected[i] - counts[i]));
  return worst;
}

Outcome balancer_properties() {
  std::mt19937 rng(90210);
  int plans = 0, partial = 0;
  std::string failure;
  for (int trial = 0; trial < 200 && failure.empty(); ++trial) {
    const int side = 2 + static_cast<int>(rng() % 7);
    const int k = 2 + static_cast<int>(rng() % std::min(7, side * side - 1));
    const DualGraph g = build_dual_graph(build_grid(side * 4, 4, 2));
    PartitionMap own = layouts::random_layout(g, k, rng);
    std::vector<int> s(static_cast<std::size_t>(k));
    for (int& x : s) x = 1 + static_cast<int>(rng() % 3);
    std::vector<double> inv(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) inv[i] = 1.0 / s[i];
    const std::vector<double> expected = expected_load(inv, side * side);
    double gap = max_abs_gap(expected, own.counts());
    for (int it = 0; it < k + 2 && failure.empty(); ++it) {
      const TransferPlan plan = plan_transfers(make_snapshot(own, g, layouts::synthetic_busy(own, s)));
      ++plans;
      if (!plan.complete) ++partial;
      const std::string where = "trial " + std::to_string(trial) + " iteration " + std::to_string(it);
      PartitionMap next = own;
      for (const Transfer& t : plan.transfers) {
        if (next.owner(t.sd) != t.from) failure = where + ": SD " + std::to_string(t.sd) + " lent by a non-owner";
        next.assign(t.sd, t.to);
      }
      const auto counts = next.counts();
      if (next.sd_count() != side * side || std::accumulate(counts.begin(), counts.end(), 0) != side * side) {
        failure = where + ": SD set changed";
      }
      for (int part = 0; part < k; ++part) {
        if (counts[static_cast<std::size_t>(part)] < 1) failure = where + ": node " + std::to_string(part) + " emptied";
        if (!is_contiguous(g, next, part)) failure = where + ": node " + std::to_string(part) + " not contiguous";
      }
      const double next_gap = max_abs_gap(expected, next.counts());
      if (next_gap > gap + 1e-9) failure = where + ": max |imbalance| grew";
      gap = next_gap;
      own = next;
      if (plan.empty()) break;
    }
  }
  std::ostringstream d;
  d << plans << " plans over 200 snapshots (" << partial << " partial)";
  if (!failure.empty()) d << "; " << failure;
  return {failure.empty(), d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    bool asserted = true;
  };
  const std::vector<Criterion> criteria{
      {1, "convergence under mesh refinement", convergence},
      {2, "first order in time", time_order},
      {3, "distributed run equals serial reference", serial_equivalence},
      {4, "load balancing from (1,16,4,4)", load_balancing},
      {5, "heterogeneous capacities (1,1,2,2)", heterogeneous_balance},
      {6, "partition quality", partition_quality},
      {7, "communication hiding", communication_hiding},
      {8, "scaling smoke (report only)", scaling_report, false},
      {9, "balancer conservation and contiguity", balancer_properties},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* verdict = !c.asserted ? "REPORT" : o.pass ? "PASS" : "FAIL";
    if (c.asserted && !o.pass) ++failed;
    std::printf("criterion %d %s: %s | %s\n", c.id, verdict, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu asserted criteria failed\n", failed, criteria.size() - 1);
  return failed == 0 ? 0 : 1;
}
