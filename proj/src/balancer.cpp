#include "nlheat/balancer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

#include <json.hpp>

#include "nlheat/errors.hpp"

namespace nlheat {

int LoadSnapshot::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

LoadSnapshot make_snapshot(const PartitionMap& ownership, const DualGraph& graph,
                           std::vector<double> busy) {
  LoadSnapshot s{ownership.counts(), std::move(busy), ownership, graph};
  validate(s);
  return s;
}

void validate(const LoadSnapshot& s) {
  if (s.ownership.sd_count() != s.graph.vertex_count()) {
    throw BalanceError("ownership covers " + std::to_string(s.ownership.sd_count()) +
                       " SDs but the dual graph has " + std::to_string(s.graph.vertex_count()));
  }
  if (s.ownership.nodes() != s.nodes() || s.busy.size() != s.counts.size()) {
    throw BalanceError("snapshot vectors disagree on the node count");
  }
  if (s.ownership.counts() != s.counts) {
    throw BalanceError("snapshot SD counts do not match the ownership map");
  }
}

std::vector<double> compute_power(const LoadSnapshot& s) {
  validate(s);
  std::vector<double> power(s.counts.size());
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    if (s.counts[i] < 1) {
      throw BalanceError("node " + std::to_string(i) + " owns no SDs; its power is undefined");
    }
    if (!(s.busy[i] > 0.0) || !std::isfinite(s.busy[i])) {
      throw BalanceError("node " + std::to_string(i) +
                         " reported no busy time; measure over more timesteps");
    }
    power[i] = s.counts[i] / s.busy[i];
  }
  return power;
}

std::vector<double> expected_load(std::span<const double> powers, int total_sds) {
  const double sum = std::accumulate(powers.begin(), powers.end(), 0.0);
  if (!(sum > 0.0)) {
    throw BalanceError("powers must be positive");
  }
  std::vector<double> e(powers.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (!(powers[i] > 0.0)) {
      throw BalanceError("power of node " + std::to_string(i) + " is not positive");
    }
    e[i] = total_sds * powers[i] / sum;
  }
  return e;
}

std::vector<double> load_imbalance(std::span<const double> expected, std::span<const int> counts) {
  if (expected.size() != counts.size()) {
    throw BalanceError("expected loads and counts differ in length");
  }
  std::vector<double> imb(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    imb[i] = expected[i] - counts[i];
  }
  return imb;
}

std::vector<int> integer_loads(std::span<const double> expected, std::span<const int> counts) {
  const std::size_t n = expected.size();
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  std::vector<int> t(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<int>(std::floor(expected[i] + 1e-9));
    assigned += t[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = expected[a] - t[a];
    const double rb = expected[b] - t[b];
    if (std::abs(ra - rb) > 1e-9) return ra > rb;
    return counts[a] > counts[b];
  });
  for (std::size_t r = 0; assigned < total && r < n; ++r, ++assigned) {
    ++t[order[r]];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] == 0) {
      auto big = std::max_element(t.begin(), t.end());
      --*big;
      t[i] = 1;
    }
  }
  return t;
}

std::vector<std::vector<int>> node_adjacency(const DualGraph& graph, const PartitionMap& ownership) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(ownership.nodes()));
  for (int v = 0; v < graph.vertex_count(); ++v) {
    for (int u : graph.face_neighbors(v)) {
      const int a = ownership.owner(v);
      const int b = ownership.owner(u);
      if (a != b) adj[static_cast<std::size_t>(a)].push_back(b);
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

DependencyTree build_dependency_tree(std::span<const std::vector<int>> adjacency,
                                     std::span<const double> imbalance) {
  const int n = static_cast<int>(adjacency.size());
  if (n == 0 || imbalance.size() != adjacency.size()) {
    throw BalanceError("dependency tree needs one imbalance per node");
  }
  DependencyTree tree;
  tree.root = static_cast<int>(std::min_element(imbalance.begin(), imbalance.end()) - imbalance.begin());
  tree.parent.assign(static_cast<std::size_t>(n), -2);
  tree.children.assign(static_cast<std::size_t>(n), {});
  tree.parent[static_cast<std::size_t>(tree.root)] = -1;
  std::queue<int> q;
  q.push(tree.root);
  int reached = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u : adjacency[static_cast<std::size_t>(v)]) {
      if (tree.parent[static_cast<std::size_t>(u)] != -2) continue;
      tree.parent[static_cast<std::size_t>(u)] = v;
      tree.children[static_cast<std::size_t>(v)].push_back(u);
      ++reached;
      q.push(u);
    }
  }
  if (reached != n) {
    throw BalanceError("node adjacency graph is disconnected (" + std::to_string(reached) + " of " +
                       std::to_string(n) + " nodes reachable from the root)");
  }
  return tree;
}

DependencyTree build_dependency_tree(const LoadSnapshot& s) {
  const auto power = compute_power(s);
  const auto expected = expected_load(power, s.total());
  const auto imb = load_imbalance(expected, s.counts);
  const auto adj = node_adjacency(s.graph, s.ownership);
  return build_dependency_tree(adj, imb);
}

std::vector<int> topological_order(const DependencyTree& tree, std::span<const double> imbalance) {
  std::vector<int> order{tree.root};
  std::vector<int> open(tree.children[static_cast<std::size_t>(tree.root)]);
  while (!open.empty()) {
    auto pick = open.begin();
    for (auto it = open.begin(); it != open.end(); ++it) {
      const double a = std::abs(imbalance[static_cast<std::size_t>(*it)]);
      const double b = std::abs(imbalance[static_cast<std::size_t>(*pick)]);
      if (a > b + 1e-12 || (std::abs(a - b) <= 1e-12 && *it < *pick)) pick = it;
    }
    const int v = *pick;
    open.erase(pick);
    order.push_back(v);
    for (int c : tree.children[static_cast<std::size_t>(v)]) open.push_back(c);
  }
  return order;
}

namespace {

double max_abs_imbalance(std::span<const double> expected, std::span<const int> counts) {
  double worst = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    worst = std::max(worst, std::abs(expected[i] - counts[i]));
  }
  return worst;
}

// Picks the lender SD to hand to `to`: face-adjacent to the borrower's SP,
// most dual-graph edges into it, then most shared faces, then lowest id.
// Returns -1 when every candidate would split or empty the lender.
int select_sd(const DualGraph& g, const PartitionMap& own, std::span<const int> counts, int from,
              int to) {
  if (counts[static_cast<std::size_t>(from)] <= 1) return -1;
  std::vector<std::tuple<int, int, int>> cands;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (own.owner(v) != from) continue;
    int faces = 0;
    for (int u : g.face_neighbors(v)) {
      if (own.owner(u) == to) ++faces;
    }
    if (faces == 0) continue;
    int edges = 0;
    for (const auto& e : g.neighbors(v)) {
      if (own.owner(e.to) == to) ++edges;
    }
    cands.emplace_back(-edges, -faces, v);
  }
  std::sort(cands.begin(), cands.end());
  for (const auto& [ne, nf, v] : cands) {
    std::vector<int> rest;
    for (int u = 0; u < g.vertex_count(); ++u) {
      if (u != v && own.owner(u) == from) rest.push_back(u);
    }
    if (is_connected(g, rest)) return v;
  }
  return -1;
}

}  // namespace

TransferPlan plan_transfers(const LoadSnapshot& s, const PlanOptions& options) {
  const auto power = compute_power(s);
  const auto expected = expected_load(power, s.total());
  const auto imb = load_imbalance(expected, s.counts);

  TransferPlan plan;
  if (max_abs_imbalance(expected, s.counts) < 1.0) {
    return plan;
  }
  const auto targets = integer_loads(expected, s.counts);
  const auto adj = node_adjacency(s.graph, s.ownership);
  const DependencyTree tree = build_dependency_tree(adj, imb);
  const std::vector<int> order = topological_order(tree, imb);

  // Net SDs that must cross the edge into each subtree (positive: towards the
  // subtree, negative: out of it).
  const auto n = static_cast<std::size_t>(s.nodes());
  std::vector<int> flow(n, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    flow[v] += targets[v] - s.counts[v];
    if (tree.parent[v] >= 0) flow[static_cast<std::size_t>(tree.parent[v])] += flow[v];
  }

  PartitionMap own = s.ownership;
  std::vector<int> counts = s.counts;
  auto move = [&](int from, int to, int q) {
    for (int c = 0; c < q; ++c) {
      const int sd = select_sd(s.graph, own, counts, from, to);
      if (sd < 0) {
        plan.complete = false;
        plan.diagnostic = "node " + std::to_string(from) + " cannot lend to node " +
                          std::to_string(to) + " (" + std::to_string(q - c) +
                          " SDs outstanding): every adjacent SD would disconnect or empty its SP";
        return false;
      }
      own.assign(sd, to);
      --counts[static_cast<std::size_t>(from)];
      ++counts[static_cast<std::size_t>(to)];
      plan.transfers.push_back({sd, from, to});
    }
    return true;
  };

  // Surplus travels up towards the root first, so every node holds what it
  // must pass down before the downward sweep.
  bool ok = true;
  for (auto it = order.rbegin(); ok && it != order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    if (tree.parent[v] >= 0 && flow[v] < 0) ok = move(*it, tree.parent[v], -flow[v]);
  }
  for (auto it = order.begin(); ok && it != order.end(); ++it) {
    std::vector<int> kids = tree.children[static_cast<std::size_t>(*it)];
    std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) {
      return std::find(order.begin(), order.end(), a) < std::find(order.begin(), order.end(), b);
    });
    for (int c : kids) {
      if (flow[static_cast<std::size_t>(c)] > 0) {
        ok = move(*it, c, flow[static_cast<std::size_t>(c)]);
        if (!ok) break;
      }
    }
  }

  if (!plan.complete && options.trim_partial) {
    std::vector<int> running = s.counts;
    std::size_t best_len = 0;
    double best = max_abs_imbalance(expected, running);
    for (std::size_t k = 0; k < plan.transfers.size(); ++k) {
      --running[static_cast<std::size_t>(plan.transfers[k].from)];
      ++running[static_cast<std::size_t>(plan.transfers[k].to)];
      const double cur = max_abs_imbalance(expected, running);
      if (cur <= best + 1e-12) {
        best = cur;
        best_len = k + 1;
      }
    }
    plan.transfers.resize(best_len);
  }
  return plan;
}

void apply_plan(PartitionMap& ownership, const TransferPlan& plan) {
  PartitionMap next = ownership;
  std::vector<int> counts = next.counts();
  for (const Transfer& t : plan.transfers) {
    if (t.sd < 0 || t.sd >= next.sd_count() || t.to < 0 || t.to >= next.nodes()) {
      throw BalanceError("transfer references an unknown SD or node");
    }
    if (next.owner(t.sd) != t.from) {
      throw BalanceError("SD " + std::to_string(t.sd) + " is owned by node " +
                         std::to_string(next.owner(t.sd)) + ", not by lender " +
                         std::to_string(t.from));
    }
    if (counts[static_cast<std::size_t>(t.from)] <= 1) {
      throw BalanceError("transfer of SD " + std::to_string(t.sd) + " would empty node " +
                         std::to_string(t.from));
    }
    next.assign(t.sd, t.to);
    --counts[static_cast<std::size_t>(t.from)];
    ++counts[static_cast<std::size_t>(t.to)];
  }
  ownership = std::move(next);
}

using nlohmann::json;

std::string to_json(const LoadSnapshot& s) {
  json edges = json::array();
  for (int v = 0; v < s.graph.vertex_count(); ++v) {
    for (const auto& e : s.graph.neighbors(v)) {
      if (e.to > v) edges.push_back({v, e.to, e.weight});
    }
  }
  json j;
  j["sx"] = s.graph.sx();
  j["sy"] = s.graph.sy();
  j["edges"] = std::move(edges);
  j["nodes"] = s.nodes();
  j["owners"] = std::vector<int>(s.ownership.owners().begin(), s.ownership.owners().end());
  j["counts"] = s.counts;
  j["busy"] = s.busy;
  return j.dump(2);
}

std::string to_json(const TransferPlan& plan) {
  json transfers = json::array();
  for (const Transfer& t : plan.transfers) {
    transfers.push_back({{"sd", t.sd}, {"from", t.from}, {"to", t.to}});
  }
  json j;
  j["transfers"] = std::move(transfers);
  j["complete"] = plan.complete;
  j["diagnostic"] = plan.diagnostic;
  return j.dump(2);
}

LoadSnapshot snapshot_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const int sx = j.at("sx").get<int>();
    const int sy = j.at("sy").get<int>();
    if (sx < 1 || sy < 1) throw BalanceError("snapshot grid must be at least 1x1");
    std::vector<std::vector<DualGraph::Edge>> adj(static_cast<std::size_t>(sx * sy));
    for (const auto& e : j.at("edges")) {
      const int a = e.at(0).get<int>();
      const int b = e.at(1).get<int>();
      const long w = e.at(2).get<long>();
      if (a < 0 || b < 0 || a >= sx * sy || b >= sx * sy) throw BalanceError("edge out of range");
      adj[static_cast<std::size_t>(a)].push_back({b, w});
      adj[static_cast<std::size_t>(b)].push_back({a, w});
    }
    PartitionMap own(j.at("owners").get<std::vector<int>>(), j.at("nodes").get<int>());
    LoadSnapshot s{own.counts(), j.at("busy").get<std::vector<double>>(), own,
                   DualGraph(sx, sy, std::move(adj))};
    if (j.contains("counts") && j["counts"].get<std::vector<int>>() != s.counts) {
      throw BalanceError("snapshot counts do not match its owners");
    }
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw BalanceError(std::string("malformed snapshot JSON: ") + e.what());
  }
}

TransferPlan plan_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    TransferPlan plan;
    for (const auto& t : j.at("transfers")) {
      plan.transfers.push_back({t.at("sd").get<int>(), t.at("from").get<int>(), t.at("to").get<int>()});
    }
    plan.complete = j.value("complete", true);
    plan.diagnostic = j.value("diagnostic", std::string{});
    return plan;
  } catch (const json::exception& e) {
    throw BalanceError(std::string("malformed plan JSON: ") + e.what());
  }
}

}  // namespace nlheat
