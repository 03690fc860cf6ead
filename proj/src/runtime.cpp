#include "nlheat/runtime.hpp"

#include <time.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "nlheat/errors.hpp"
#include "nlheat/partition.hpp"

namespace nlheat {

namespace {

using Clock = std::chrono::steady_clock;

// CPU time of the calling thread. Wall time would count time slices spent on
// other workers whenever workers outnumber cores.
double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

struct GhostMsg {
  int step = 0;
  int src_sd = 0;
  int src_node = 0;
  std::vector<std::size_t> index;  // padded-buffer positions of the DP list
  std::vector<double> values;
  Clock::time_point ready;
};

struct SdWork {
  int sd = 0;
  std::vector<DpIndex> case1;
  std::vector<DpIndex> case2;
  std::vector<int> needs;  // foreign SDs whose ghost data case1 reads
};

struct SendSpec {
  int sd = 0;
  int dst = 0;
  std::vector<std::size_t> index;
};

struct Aborted {};

}  // namespace

struct Cluster::Impl {
  struct Node {
    int id = 0;
    int repeats = 1;
    Field buf[2];
    int cur = 0;
    std::vector<SdWork> work;
    std::vector<SendSpec> sends;
    std::vector<std::size_t> ghost_index;
    std::vector<char> got;
    SourceFn source;
    double busy = 0.0;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<GhostMsg> inbox;

    std::thread thread;
  };

  RunConfig cfg;
  SdGrid grid;
  ModelParams params;
  Stencil stencil;
  FlatStencil flat;
  ManufacturedSource source;
  double dt = 0.0;
  PartitionMap own;
  std::shared_ptr<EventTrace> trace = std::make_shared<EventTrace>();
  std::vector<std::unique_ptr<Node>> nodes;
  std::vector<std::vector<std::chrono::milliseconds>> delay;

  int step = 0;
  std::atomic<int> sends_done{0};
  std::atomic<bool> abort{false};
  bool broken = false;
  Clock::time_point reset_at = Clock::now();
  std::vector<StepRecord> errors;
  std::vector<double> step_seconds;

  std::mutex gate_mu;
  std::condition_variable gate_cv;
  long generation = 0;
  int arrived = 0;
  bool quit = false;
  std::exception_ptr fault;

  explicit Impl(RunConfig config);
  ~Impl();

  void rebuild();
  void worker(Node& node);
  void run_step(Node& node, int k);
  void wake_all();
  void halt(std::exception_ptr e);
  void trace_event(int node, EventKind kind, int k, int sd = -1, int peer = -1) {
    trace->record(node, kind, k, sd, peer);
  }
};

double resolve_dt(const RunConfig& config) {
  const DomainSpec spec(config.n, config.m);
  if (!(config.conductivity > 0.0) || !std::isfinite(config.conductivity)) {
    throw ConfigError("conductivity must be positive");
  }
  const ModelParams params = make_model(config.conductivity, spec);
  const double limit = stable_dt(params, build_stencil(config.m, spec.h()));
  if (!config.dt) {
    if (!std::isfinite(limit)) {
      throw ConfigError("dt=auto needs a nonlocal operator (m >= 1); give dt explicitly");
    }
    return 0.5 * limit;
  }
  const double dt = *config.dt;
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("dt must be positive and finite");
  }
  if (dt > limit && !config.allow_unstable) {
    throw ConfigError("dt=" + std::to_string(dt) + " exceeds the stable limit " +
                      std::to_string(limit) + "; pass --allow-unstable to run anyway");
  }
  return dt;
}

void validate(const RunConfig& c) {
  const SdGrid grid = build_grid(c.n, c.p, c.m);
  if (c.nodes < 1) throw ConfigError("need at least one node");
  if (c.nodes > grid.count()) {
    throw ConfigError(std::to_string(c.nodes) + " nodes but only " + std::to_string(grid.count()) +
                      " SDs");
  }
  if (c.steps < 0) throw ConfigError("steps must be >= 0");
  if (c.balance_interval < 0) throw ConfigError("balance interval must be >= 0");
  if (!c.capacity.empty()) {
    if (c.capacity.size() != static_cast<std::size_t>(c.nodes)) {
      throw ConfigError("expected " + std::to_string(c.nodes) + " capacity factors, got " +
                        std::to_string(c.capacity.size()));
    }
    for (int s : c.capacity) {
      if (s < 1) throw ConfigError("capacity factors must be integers >= 1");
    }
  }
  if (c.ownership) {
    if (c.ownership->sd_count() != grid.count() || c.ownership->nodes() != c.nodes) {
      throw ConfigError("initial ownership does not match the grid and node count");
    }
    for (int count : c.ownership->counts()) {
      if (count < 1) throw ConfigError("every node must own at least one SD");
    }
  }
  for (const LinkDelay& d : c.delays) {
    if (d.from < 0 || d.to < 0 || d.from >= c.nodes || d.to >= c.nodes || d.delay.count() < 0) {
      throw ConfigError("link delay references an unknown node");
    }
  }
  resolve_dt(c);
}

Cluster::Impl::Impl(RunConfig config)
    : cfg((validate(config), std::move(config))),
      grid(build_grid(cfg.n, cfg.p, cfg.m)),
      params(make_model(cfg.conductivity, grid.spec())),
      stencil(build_stencil(cfg.m, grid.spec().h())),
      flat(flatten(stencil, params, grid.spec().padded())),
      source(grid.spec(), params, cfg.source_mode),
      dt(resolve_dt(cfg)) {
  trace->set_enabled(cfg.trace);
  own = cfg.ownership ? *cfg.ownership : partition_kway(build_dual_graph(grid), cfg.nodes);

  delay.assign(static_cast<std::size_t>(cfg.nodes),
               std::vector<std::chrono::milliseconds>(static_cast<std::size_t>(cfg.nodes)));
  for (const LinkDelay& d : cfg.delays) {
    delay[static_cast<std::size_t>(d.from)][static_cast<std::size_t>(d.to)] = d.delay;
  }

  const Field initial = manufactured_initial(grid.spec());
  for (int id = 0; id < cfg.nodes; ++id) {
    auto node = std::make_unique<Node>();
    node->id = id;
    node->repeats = cfg.capacity.empty() ? 1 : cfg.capacity[static_cast<std::size_t>(id)];
    for (Field& f : node->buf) {
      f = initial;
      f.poison_interior();
    }
    for (int sd : own.sds_of(id)) {
      for (const DpIndex& d : grid.dps(sd)) node->buf[0][d] = initial[d];
    }
    node->source = source.as_function();
    node->got.assign(static_cast<std::size_t>(grid.count()), 0);
    nodes.push_back(std::move(node));
  }
  rebuild();
  for (auto& node : nodes) {
    Node* n = node.get();
    n->thread = std::thread([this, n] { worker(*n); });
  }
}

Cluster::Impl::~Impl() {
  {
    std::lock_guard lock(gate_mu);
    quit = true;
  }
  gate_cv.notify_all();
  abort = true;
  wake_all();
  for (auto& node : nodes) {
    if (node->thread.joinable()) node->thread.join();
  }
}

void Cluster::Impl::rebuild() {
  for (auto& node : nodes) {
    node->work.clear();
    node->sends.clear();
    node->ghost_index.clear();
  }
  const Field& layout = nodes.front()->buf[0];
  for (int sd = 0; sd < grid.count(); ++sd) {
    const int owner = own.owner(sd);
    DpSplit split = classify_dps(sd, grid, own);
    nodes[static_cast<std::size_t>(owner)]->work.push_back(
        SdWork{sd, std::move(split.case1), std::move(split.case2), foreign_dependencies(sd, grid, own)});
    for (int dst = 0; dst < cfg.nodes; ++dst) {
      const std::vector<DpIndex> region = ghost_region(sd, dst, grid, own);
      if (region.empty()) continue;
      SendSpec send{sd, dst, {}};
      for (const DpIndex& d : region) send.index.push_back(layout.index(d));
      auto& ghosts = nodes[static_cast<std::size_t>(dst)]->ghost_index;
      ghosts.insert(ghosts.end(), send.index.begin(), send.index.end());
      nodes[static_cast<std::size_t>(owner)]->sends.push_back(std::move(send));
    }
  }
}

void Cluster::Impl::wake_all() {
  for (auto& node : nodes) {
    std::lock_guard lock(node->mu);
    node->cv.notify_all();
  }
}

void Cluster::Impl::halt(std::exception_ptr e) {
  {
    std::lock_guard lock(gate_mu);
    if (!fault) fault = e;
  }
  abort = true;
  wake_all();
}

void Cluster::Impl::worker(Node& node) {
  long seen = 0;
  for (;;) {
    int k = 0;
    {
      std::unique_lock lock(gate_mu);
      gate_cv.wait(lock, [&] { return quit || generation != seen; });
      if (quit) return;
      seen = generation;
      k = step;
    }
    if (!abort) {
      try {
        run_step(node, k);
      } catch (const Aborted&) {
      } catch (...) {
        halt(std::current_exception());
      }
    }
    {
      std::lock_guard lock(gate_mu);
      ++arrived;
    }
    gate_cv.notify_all();
  }
}

void Cluster::Impl::run_step(Node& node, int k) {
  const double t = k * dt;
  Field& cur = node.buf[node.cur];
  Field& next = node.buf[1 - node.cur];
  const int peers = cfg.nodes;

  for (const SendSpec& s : node.sends) {
    if (cfg.drop && cfg.drop(k, s.sd, node.id, s.dst)) continue;
    GhostMsg msg{k, s.sd, node.id, s.index, {}, {}};
    msg.values.reserve(s.index.size());
    for (std::size_t idx : s.index) msg.values.push_back(cur.raw()[idx]);
    msg.ready = Clock::now() + delay[static_cast<std::size_t>(node.id)][static_cast<std::size_t>(s.dst)];
    Node& dst = *nodes[static_cast<std::size_t>(s.dst)];
    trace_event(node.id, EventKind::ghost_sent, k, s.sd, s.dst);
    {
      std::lock_guard lock(dst.mu);
      dst.inbox.push_back(std::move(msg));
    }
    dst.cv.notify_all();
  }
  sends_done.fetch_add(1);
  wake_all();

  auto compute = [&](std::span<const DpIndex> points) {
    const double start = thread_cpu_seconds();
    step_points(cur, next, points, t, dt, node.source, flat, params, node.repeats);
    node.busy += thread_cpu_seconds() - start;
  };

  for (const SdWork& w : node.work) {
    if (w.case2.empty()) continue;
    trace_event(node.id, EventKind::case2_start, k, w.sd);
    compute(w.case2);
    trace_event(node.id, EventKind::case2_end, k, w.sd);
  }

  std::fill(node.got.begin(), node.got.end(), 0);
  std::vector<const SdWork*> pending;
  for (const SdWork& w : node.work) {
    if (!w.case1.empty()) pending.push_back(&w);
  }
  while (!pending.empty()) {
    std::vector<GhostMsg> ready;
    {
      std::lock_guard lock(node.mu);
      const auto now = Clock::now();
      for (auto it = node.inbox.begin(); it != node.inbox.end();) {
        if (it->ready <= now) {
          ready.push_back(std::move(*it));
          it = node.inbox.erase(it);
        } else {
          ++it;
        }
      }
    }
    for (GhostMsg& msg : ready) {
      if (msg.step != k) {
        throw RuntimeFault("node " + std::to_string(node.id) + " received ghost data of step " +
                           std::to_string(msg.step) + " during step " + std::to_string(k));
      }
      for (std::size_t i = 0; i < msg.index.size(); ++i) cur.raw()[msg.index[i]] = msg.values[i];
      node.got[static_cast<std::size_t>(msg.src_sd)] = 1;
      trace_event(node.id, EventKind::ghost_recv, k, msg.src_sd, msg.src_node);
    }

    bool progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const SdWork& w = **it;
      const bool complete = std::all_of(w.needs.begin(), w.needs.end(), [&](int q) {
        return node.got[static_cast<std::size_t>(q)] != 0;
      });
      if (!complete) {
        ++it;
        continue;
      }
      trace_event(node.id, EventKind::case1_start, k, w.sd);
      compute(w.case1);
      trace_event(node.id, EventKind::case1_end, k, w.sd);
      it = pending.erase(it);
      progress = true;
    }
    if (pending.empty() || progress || !ready.empty()) continue;

    std::unique_lock lock(node.mu);
    if (abort) throw Aborted{};
    if (node.inbox.empty()) {
      if (sends_done.load() == peers) {
        lock.unlock();
        const SdWork& w = *pending.front();
        int missing = -1;
        for (int q : w.needs) {
          if (!node.got[static_cast<std::size_t>(q)]) {
            missing = q;
            break;
          }
        }
        throw RuntimeFault("deadlock at step " + std::to_string(k) + ": node " +
                           std::to_string(node.id) + " never received ghost data for SD " +
                           std::to_string(w.sd) + " from SD " + std::to_string(missing) +
                           " on node " + std::to_string(own.owner(missing)) +
                           " after all peers finished sending");
      }
      node.cv.wait(lock, [&] {
        return abort || !node.inbox.empty() || sends_done.load() == peers;
      });
    } else {
      auto earliest = node.inbox.front().ready;
      for (const GhostMsg& m : node.inbox) earliest = std::min(earliest, m.ready);
      node.cv.wait_until(lock, earliest, [&] { return abort.load(); });
    }
    if (abort) throw Aborted{};
  }

  for (std::size_t idx : node.ghost_index) cur.raw()[idx] = missing_value();
  next.step = k + 1;
  next.time = (k + 1) * dt;
  node.cur = 1 - node.cur;
}

Cluster::Cluster(RunConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Cluster::~Cluster() = default;

void Cluster::advance(int count) {
  Impl& s = *impl_;
  for (int c = 0; c < count; ++c) {
    if (s.broken) throw RuntimeFault("cluster halted by an earlier fault");
    if (auto it = s.cfg.scripted_transfers.find(s.step); it != s.cfg.scripted_transfers.end()) {
      apply_transfers(it->second);
    }
    const auto start = Clock::now();
    s.sends_done = 0;
    {
      std::lock_guard lock(s.gate_mu);
      s.arrived = 0;
      ++s.generation;
    }
    s.gate_cv.notify_all();
    {
      std::unique_lock lock(s.gate_mu);
      s.gate_cv.wait(lock, [&] { return s.arrived == s.cfg.nodes; });
    }
    s.step_seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    if (s.fault) {
      s.broken = true;
      std::rethrow_exception(s.fault);
    }
    ++s.step;
    if (s.cfg.record_errors) {
      s.errors.push_back({s.step, s.step * s.dt, error_l2(gather(), s.step * s.dt)});
    }
  }
}

void Cluster::apply_transfers(const TransferPlan& plan) {
  Impl& s = *impl_;
  if (plan.empty()) return;
  PartitionMap next = s.own;
  try {
    apply_plan(next, plan);
  } catch (const BalanceError& e) {
    throw RuntimeFault(std::string("transfer plan does not match ownership: ") + e.what());
  }
  for (const Transfer& t : plan.transfers) {
    auto& lender = *s.nodes[static_cast<std::size_t>(t.from)];
    auto& borrower = *s.nodes[static_cast<std::size_t>(t.to)];
    Field& src = lender.buf[lender.cur];
    Field& dst = borrower.buf[borrower.cur];
    for (const DpIndex& d : s.grid.dps(t.sd)) {
      dst[d] = src[d];
      src[d] = missing_value();
      lender.buf[1 - lender.cur][d] = missing_value();
    }
    s.trace_event(t.to, EventKind::transfer_applied, s.step, t.sd, t.from);
  }
  s.own = std::move(next);
  s.rebuild();
}

std::vector<PerfCounter> Cluster::read_counters() const {
  const double total = std::chrono::duration<double>(Clock::now() - impl_->reset_at).count();
  std::vector<PerfCounter> out;
  for (const auto& node : impl_->nodes) {
    out.push_back({std::min(node->busy, total), total});
  }
  return out;
}

void Cluster::reset_counters() {
  for (auto& node : impl_->nodes) {
    node->busy = 0.0;
    impl_->trace_event(node->id, EventKind::counter_reset, impl_->step);
  }
  impl_->reset_at = Clock::now();
}

Field Cluster::gather() const {
  const Impl& s = *impl_;
  Field out(s.grid.spec());
  for (int sd = 0; sd < s.grid.count(); ++sd) {
    const auto& node = *s.nodes[static_cast<std::size_t>(s.own.owner(sd))];
    const Field& f = node.buf[node.cur];
    for (const DpIndex& d : s.grid.dps(sd)) out[d] = f[d];
  }
  out.step = s.step;
  out.time = s.step * s.dt;
  return out;
}

const PartitionMap& Cluster::ownership() const { return impl_->own; }
const SdGrid& Cluster::grid() const { return impl_->grid; }
int Cluster::step() const { return impl_->step; }
double Cluster::dt() const { return impl_->dt; }
std::shared_ptr<EventTrace> Cluster::trace() const { return impl_->trace; }
const std::vector<StepRecord>& Cluster::errors() const { return impl_->errors; }
const std::vector<double>& Cluster::step_seconds() const { return impl_->step_seconds; }

SimulationReport run_simulation(const RunConfig& config) {
  const auto start = Clock::now();
  Cluster cluster(config);
  const DualGraph graph = build_dual_graph(cluster.grid());

  SimulationReport report;
  report.dt = cluster.dt();
  report.ownership.push_back(cluster.ownership());
  cluster.reset_counters();

  int iteration = 0;
  for (int k = 0; k < config.steps; ++k) {
    cluster.advance(1);
    if (config.balance_interval <= 0 || (k + 1) % config.balance_interval != 0) continue;

    const auto counters = cluster.read_counters();
    const std::vector<int> counts = cluster.ownership().counts();
    std::vector<double> busy(counters.size());
    for (std::size_t i = 0; i < counters.size(); ++i) {
      const int s = config.capacity.empty() ? 1 : config.capacity[i];
      busy[i] = config.busy_model == BusyModel::synthetic ? static_cast<double>(counts[i]) * s
                                                          : counters[i].busy;
    }
    const LoadSnapshot snap = make_snapshot(cluster.ownership(), graph, busy);
    BalanceRecord rec;
    rec.iteration = ++iteration;
    rec.step = k + 1;
    rec.counts = counts;
    rec.busy = busy;
    for (const auto& c : counters) rec.total.push_back(c.total);
    const double peak = *std::max_element(busy.begin(), busy.end());
    for (std::size_t i = 0; i < busy.size(); ++i) {
      const double denom = config.busy_model == BusyModel::synthetic ? peak : rec.total[i];
      rec.busy_fraction.push_back(denom > 0.0 ? busy[i] / denom : 0.0);
    }
    rec.power = compute_power(snap);
    rec.imbalance = load_imbalance(expected_load(rec.power, snap.total()), counts);
    rec.plan = plan_transfers(snap);
    cluster.apply_transfers(rec.plan);
    cluster.reset_counters();
    report.ownership.push_back(cluster.ownership());
    const bool settled = rec.plan.empty();
    report.balance.push_back(std::move(rec));
    if (config.stop_when_balanced && settled) break;
  }

  report.steps_run = cluster.step();
  report.errors = cluster.errors();
  report.step_seconds = cluster.step_seconds();
  report.field = cluster.gather();
  report.trace = cluster.trace();
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace nlheat
