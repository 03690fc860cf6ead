#include "nlheat/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <tuple>

#include "nlheat/errors.hpp"

namespace nlheat {

DualGraph::DualGraph(int sx, int sy, std::vector<std::vector<Edge>> adjacency)
    : sx_(sx), sy_(sy), adjacency_(std::move(adjacency)) {
  if (sx < 1 || sy < 1 || adjacency_.size() != static_cast<std::size_t>(sx * sy)) {
    throw ConfigError("dual graph adjacency does not match the tile grid");
  }
  faces_.resize(adjacency_.size());
  for (int v = 0; v < sx * sy; ++v) {
    const int x = v % sx;
    const int y = v / sx;
    auto& f = faces_[static_cast<std::size_t>(v)];
    if (y > 0) f.push_back(v - sx);
    if (x > 0) f.push_back(v - 1);
    if (x + 1 < sx) f.push_back(v + 1);
    if (y + 1 < sy) f.push_back(v + sx);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
  }
}

long DualGraph::weight(int a, int b) const {
  for (const Edge& e : neighbors(a)) {
    if (e.to == b) {
      return e.weight;
    }
  }
  return 0;
}

long DualGraph::total_weight() const {
  long sum = 0;
  for (const auto& list : adjacency_) {
    for (const Edge& e : list) {
      sum += e.weight;
    }
  }
  return sum / 2;
}

DualGraph build_dual_graph(const SdGrid& grid) {
  std::vector<std::vector<DualGraph::Edge>> adj(static_cast<std::size_t>(grid.count()));
  for (const SubDomain& a : grid.sds()) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int tx = a.tx + dx;
        const int ty = a.ty + dy;
        if ((dx == 0 && dy == 0) || tx < 0 || ty < 0 || tx >= grid.sx() || ty >= grid.sy()) {
          continue;
        }
        const int b = grid.sd_at(tx, ty);
        if (b < a.id) {
          continue;
        }
        const long w = static_cast<long>(tile_ghost_region(a.id, b, grid).size() +
                                         tile_ghost_region(b, a.id, grid).size());
        if (w > 0) {
          adj[static_cast<std::size_t>(a.id)].push_back({b, w});
          adj[static_cast<std::size_t>(b)].push_back({a.id, w});
        }
      }
    }
  }
  return DualGraph(grid.sx(), grid.sy(), std::move(adj));
}

long edge_cut(const DualGraph& graph, const PartitionMap& pmap) {
  long cut = 0;
  for (int v = 0; v < graph.vertex_count(); ++v) {
    for (const auto& e : graph.neighbors(v)) {
      if (e.to > v && pmap.owner(v) != pmap.owner(e.to)) {
        cut += e.weight;
      }
    }
  }
  return cut;
}

bool is_connected(const DualGraph& graph, std::span<const int> members) {
  if (members.empty()) {
    return true;
  }
  std::vector<char> in(static_cast<std::size_t>(graph.vertex_count()), 0);
  for (int v : members) {
    in[static_cast<std::size_t>(v)] = 1;
  }
  std::vector<int> stack{members.front()};
  in[static_cast<std::size_t>(members.front())] = 2;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : graph.face_neighbors(v)) {
      if (in[static_cast<std::size_t>(u)] == 1) {
        in[static_cast<std::size_t>(u)] = 2;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == members.size();
}

bool is_contiguous(const DualGraph& graph, const PartitionMap& pmap, int part) {
  const std::vector<int> members = pmap.sds_of(part);
  return is_connected(graph, members);
}

std::vector<int> integer_targets(int total, std::span<const double> weights) {
  const std::size_t k = weights.size();
  std::vector<int> out(k, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t p = 0; p < k; ++p) {
    const double exact = weights[p] * total;
    out[p] = static_cast<int>(std::floor(exact + 1e-12));
    assigned += out[p];
    remainders.emplace_back(exact - out[p], p);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first + 1e-12; });
  for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r, ++assigned) {
    ++out[remainders[r].second];
  }
  return out;
}

namespace {

std::vector<int> snake_order(const DualGraph& g, bool by_rows) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(g.vertex_count()));
  const int outer = by_rows ? g.sy() : g.sx();
  const int inner = by_rows ? g.sx() : g.sy();
  for (int a = 0; a < outer; ++a) {
    for (int b = 0; b < inner; ++b) {
      const int c = (a % 2 == 0) ? b : inner - 1 - b;
      order.push_back(by_rows ? a * g.sx() + c : c * g.sx() + a);
    }
  }
  return order;
}

std::vector<int> chunk(const std::vector<int>& order, std::span<const int> sizes, int vertices) {
  std::vector<int> part(static_cast<std::size_t>(vertices), 0);
  std::size_t at = 0;
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    for (int c = 0; c < sizes[p]; ++c) {
      part[static_cast<std::size_t>(order[at++])] = static_cast<int>(p);
    }
  }
  return part;
}

// Working state shared by the construction heuristics: part id per vertex
// (-1 while unassigned) and part sizes.
struct Assignment {
  std::vector<int> part;
  std::vector<int> size;

  Assignment(int vertices, int k)
      : part(static_cast<std::size_t>(vertices), -1), size(static_cast<std::size_t>(k), 0) {}

  int of(int v) const { return part[static_cast<std::size_t>(v)]; }
  void set(int v, int p) {
    const int old = of(v);
    if (old >= 0) --size[static_cast<std::size_t>(old)];
    part[static_cast<std::size_t>(v)] = p;
    if (p >= 0) ++size[static_cast<std::size_t>(p)];
  }
};

// Whether part `p` stays 4-connected after `removed` leaves it.
bool connected_without(const DualGraph& g, const Assignment& a, int p, int removed) {
  const int remaining = a.size[static_cast<std::size_t>(p)] - 1;
  if (remaining <= 0) {
    return remaining == 0;
  }
  int start = -1;
  for (int u : g.face_neighbors(removed)) {
    if (a.of(u) == p) {
      start = u;
      break;
    }
  }
  if (start < 0) {
    return false;
  }
  std::vector<char> seen(static_cast<std::size_t>(g.vertex_count()), 0);
  seen[static_cast<std::size_t>(removed)] = 1;
  seen[static_cast<std::size_t>(start)] = 1;
  std::vector<int> stack{start};
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : g.face_neighbors(v)) {
      if (!seen[static_cast<std::size_t>(u)] && a.of(u) == p) {
        seen[static_cast<std::size_t>(u)] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == remaining;
}

// (ghost weight, face contacts) of vertex v towards part p.
std::pair<long, int> affinity(const DualGraph& g, const Assignment& a, int v, int p) {
  long w = 0;
  for (const auto& e : g.neighbors(v)) {
    if (e.to != v && a.of(e.to) == p) w += e.weight;
  }
  int faces = 0;
  for (int u : g.face_neighbors(v)) {
    if (a.of(u) == p) ++faces;
  }
  return {w, faces};
}

int dist2(const DualGraph& g, int a, int b) {
  const int dx = g.tx(a) - g.tx(b);
  const int dy = g.ty(a) - g.ty(b);
  return dx * dx + dy * dy;
}

std::vector<int> farthest_point_seeds(const DualGraph& g, int k) {
  std::vector<int> seeds{0};
  std::vector<int> nearest(static_cast<std::size_t>(g.vertex_count()));
  for (int v = 0; v < g.vertex_count(); ++v) {
    nearest[static_cast<std::size_t>(v)] = dist2(g, v, 0);
  }
  while (static_cast<int>(seeds.size()) < k) {
    int best = -1;
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (best < 0 || nearest[static_cast<std::size_t>(v)] > nearest[static_cast<std::size_t>(best)]) {
        best = v;
      }
    }
    seeds.push_back(best);
    for (int v = 0; v < g.vertex_count(); ++v) {
      nearest[static_cast<std::size_t>(v)] = std::min(nearest[static_cast<std::size_t>(v)], dist2(g, v, best));
    }
  }
  return seeds;
}

// Moves one vertex from part `from` to the adjacent part `to`, keeping
// `from` connected and non-empty.
bool shift_one(const DualGraph& g, Assignment& a, int from, int to) {
  if (a.size[static_cast<std::size_t>(from)] <= 1) {
    return false;
  }
  int best = -1;
  std::pair<int, long> best_key{-1, -1};
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (a.of(v) != from) continue;
    const auto [w, faces] = affinity(g, a, v, to);
    if (faces == 0) continue;
    const std::pair<int, long> key{faces, w};
    if (best >= 0 && key <= best_key) continue;
    if (!connected_without(g, a, from, v)) continue;
    best = v;
    best_key = key;
  }
  if (best < 0) {
    return false;
  }
  a.set(best, to);
  return true;
}

std::vector<std::vector<int>> part_adjacency(const DualGraph& g, const Assignment& a, int k) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(k));
  for (int v = 0; v < g.vertex_count(); ++v) {
    for (int u : g.face_neighbors(v)) {
      const int pv = a.of(v);
      const int pu = a.of(u);
      if (pv >= 0 && pu >= 0 && pv != pu) {
        adj[static_cast<std::size_t>(pv)].push_back(pu);
      }
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

// Pushes surplus vertices along part-adjacency paths until every part has its
// target size.
bool repair_balance(const DualGraph& g, Assignment& a, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const int limit = g.vertex_count() * g.vertex_count() + 16;
  for (int iter = 0; iter < limit; ++iter) {
    int over = -1;
    for (int p = 0; p < k; ++p) {
      if (a.size[static_cast<std::size_t>(p)] > targets[static_cast<std::size_t>(p)]) {
        over = p;
        break;
      }
    }
    if (over < 0) {
      return true;
    }
    const auto adj = part_adjacency(g, a, k);
    std::vector<int> prev(static_cast<std::size_t>(k), -2);
    std::queue<int> q;
    q.push(over);
    prev[static_cast<std::size_t>(over)] = -1;
    int under = -1;
    while (!q.empty() && under < 0) {
      const int p = q.front();
      q.pop();
      for (int r : adj[static_cast<std::size_t>(p)]) {
        if (prev[static_cast<std::size_t>(r)] != -2) continue;
        prev[static_cast<std::size_t>(r)] = p;
        if (a.size[static_cast<std::size_t>(r)] < targets[static_cast<std::size_t>(r)]) {
          under = r;
          break;
        }
        q.push(r);
      }
    }
    if (under < 0) {
      return false;
    }
    std::vector<int> path;
    for (int p = under; p != -1; p = prev[static_cast<std::size_t>(p)]) {
      path.push_back(p);
    }
    std::reverse(path.begin(), path.end());
    // Shift from the far end first so no intermediate part is emptied.
    for (std::size_t s = path.size() - 1; s > 0; --s) {
      if (!shift_one(g, a, path[s - 1], path[s])) {
        return false;
      }
    }
  }
  return false;
}

std::optional<std::vector<int>> grow_regions(const DualGraph& g, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  Assignment a(g.vertex_count(), k);
  const std::vector<int> seeds = farthest_point_seeds(g, k);
  for (int p = 0; p < k; ++p) {
    a.set(seeds[static_cast<std::size_t>(p)], p);
  }

  for (;;) {
    int grow = -1;
    int best_v = -1;
    for (int p = 0; p < k; ++p) {
      const int size = a.size[static_cast<std::size_t>(p)];
      const int target = targets[static_cast<std::size_t>(p)];
      if (size >= target) continue;
      if (grow >= 0) {
        // Lowest fill ratio first: size/target < best_size/best_target.
        const long lhs = static_cast<long>(size) * targets[static_cast<std::size_t>(grow)];
        const long rhs = static_cast<long>(a.size[static_cast<std::size_t>(grow)]) * target;
        if (lhs >= rhs) continue;
      }
      int cand = -1;
      std::tuple<int, int, int> cand_key{};
      for (int v = 0; v < g.vertex_count(); ++v) {
        if (a.of(v) != -1) continue;
        const int faces = affinity(g, a, v, p).second;
        if (faces == 0) continue;
        const std::tuple<int, int, int> key{faces, -dist2(g, v, seeds[static_cast<std::size_t>(p)]), -v};
        if (cand < 0 || key > cand_key) {
          cand = v;
          cand_key = key;
        }
      }
      if (cand >= 0) {
        grow = p;
        best_v = cand;
      }
    }
    if (grow < 0) break;
    a.set(best_v, grow);
  }

  // Pockets enclosed by full parts join a neighbouring part whole.
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (a.of(v) != -1) continue;
    std::vector<int> comp{v};
    a.part[static_cast<std::size_t>(v)] = -2;
    for (std::size_t c = 0; c < comp.size(); ++c) {
      for (int u : g.face_neighbors(comp[c])) {
        if (a.of(u) == -1) {
          a.part[static_cast<std::size_t>(u)] = -2;
          comp.push_back(u);
        }
      }
    }
    int host = -1;
    for (int c : comp) {
      for (int u : g.face_neighbors(c)) {
        const int p = a.of(u);
        if (p < 0) continue;
        if (host < 0) {
          host = p;
          continue;
        }
        const long lhs = static_cast<long>(a.size[static_cast<std::size_t>(p)]) * targets[static_cast<std::size_t>(host)];
        const long rhs = static_cast<long>(a.size[static_cast<std::size_t>(host)]) * targets[static_cast<std::size_t>(p)];
        if (lhs < rhs || (lhs == rhs && p < host)) host = p;
      }
    }
    if (host < 0) {
      return std::nullopt;
    }
    for (int c : comp) {
      a.part[static_cast<std::size_t>(c)] = -1;
      a.set(c, host);
    }
  }

  if (!repair_balance(g, a, targets)) {
    return std::nullopt;
  }
  return a.part;
}

// Cut between two vertex sets: (ghost weight, face contacts).
std::pair<long, int> bisection_cut(const DualGraph& g, std::span<const int> left,
                                   const std::vector<char>& in_left,
                                   const std::vector<char>& in_region) {
  long w = 0;
  int faces = 0;
  for (int v : left) {
    for (const auto& e : g.neighbors(v)) {
      if (in_region[static_cast<std::size_t>(e.to)] && !in_left[static_cast<std::size_t>(e.to)]) {
        w += e.weight;
      }
    }
    for (int u : g.face_neighbors(v)) {
      if (in_region[static_cast<std::size_t>(u)] && !in_left[static_cast<std::size_t>(u)]) {
        ++faces;
      }
    }
  }
  return {w, faces};
}

bool bisect(const DualGraph& g, std::vector<int> region, int first, std::span<const int> targets,
            std::vector<int>& part) {
  const std::size_t k = targets.size();
  if (k == 1) {
    for (int v : region) part[static_cast<std::size_t>(v)] = first;
    return true;
  }
  const std::size_t k1 = k / 2;
  const int q = std::accumulate(targets.begin(), targets.begin() + static_cast<long>(k1), 0);

  std::vector<char> in_region(static_cast<std::size_t>(g.vertex_count()), 0);
  int min_x = g.sx(), max_x = -1, min_y = g.sy(), max_y = -1;
  for (int v : region) {
    in_region[static_cast<std::size_t>(v)] = 1;
    min_x = std::min(min_x, g.tx(v));
    max_x = std::max(max_x, g.tx(v));
    min_y = std::min(min_y, g.ty(v));
    max_y = std::max(max_y, g.ty(v));
  }
  // Sweep across the longer extent first so ties favour compact halves.
  const bool x_first = (max_x - min_x) >= (max_y - min_y);

  std::optional<std::vector<int>> best_left;
  std::pair<long, int> best_cut{};
  for (int axis_pick = 0; axis_pick < 2; ++axis_pick) {
    const bool along_x = (axis_pick == 0) == x_first;
    for (int s1 : {1, -1}) {
      for (int s2 : {1, -1}) {
        std::vector<int> order = region;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          const int pa = along_x ? g.tx(a) : g.ty(a);
          const int pb = along_x ? g.tx(b) : g.ty(b);
          const int sa = along_x ? g.ty(a) : g.tx(a);
          const int sb = along_x ? g.ty(b) : g.tx(b);
          return std::tuple(s1 * pa, s2 * sa, a) < std::tuple(s1 * pb, s2 * sb, b);
        });
        std::vector<int> left(order.begin(), order.begin() + q);
        std::vector<int> right(order.begin() + q, order.end());
        if (!is_connected(g, left) || !is_connected(g, right)) continue;
        std::vector<char> in_left(static_cast<std::size_t>(g.vertex_count()), 0);
        for (int v : left) in_left[static_cast<std::size_t>(v)] = 1;
        const auto cut = bisection_cut(g, left, in_left, in_region);
        if (!best_left || cut < best_cut) {
          best_left = std::move(left);
          best_cut = cut;
        }
      }
    }
  }
  if (!best_left) {
    return false;
  }
  std::sort(best_left->begin(), best_left->end());
  std::vector<char> in_left(static_cast<std::size_t>(g.vertex_count()), 0);
  for (int v : *best_left) in_left[static_cast<std::size_t>(v)] = 1;
  std::vector<int> right;
  for (int v : region) {
    if (!in_left[static_cast<std::size_t>(v)]) right.push_back(v);
  }
  return bisect(g, *best_left, first, targets.subspan(0, k1), part) &&
         bisect(g, right, first + static_cast<int>(k1), targets.subspan(k1), part);
}

std::optional<std::vector<int>> recursive_bisection(const DualGraph& g, std::span<const int> targets) {
  std::vector<int> region(static_cast<std::size_t>(g.vertex_count()));
  std::iota(region.begin(), region.end(), 0);
  std::vector<int> part(region.size(), -1);
  if (!bisect(g, region, 0, targets, part)) {
    return std::nullopt;
  }
  return part;
}

// Gain in (ghost weight, face contacts) of moving v to part `to`.
std::pair<long, int> move_gain(const DualGraph& g, const Assignment& a, int v, int to) {
  const auto [w_to, f_to] = affinity(g, a, v, to);
  const auto [w_from, f_from] = affinity(g, a, v, a.of(v));
  return {w_to - w_from, f_to - f_from};
}

// Greedy boundary refinement: single moves within the size window, then
// pairwise swaps, accepting only strict improvements in (cut, face cut).
void refine(const DualGraph& g, Assignment& a, std::span<const int> lo, std::span<const int> hi) {
  const std::pair<long, int> zero{0, 0};
  const int max_passes = 32;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (int v = 0; v < g.vertex_count(); ++v) {
      const int from = a.of(v);
      if (a.size[static_cast<std::size_t>(from)] - 1 < lo[static_cast<std::size_t>(from)]) continue;
      int best_to = -1;
      std::pair<long, int> best_gain = zero;
      for (int u : g.face_neighbors(v)) {
        const int to = a.of(u);
        if (to == from || to == best_to) continue;
        if (a.size[static_cast<std::size_t>(to)] + 1 > hi[static_cast<std::size_t>(to)]) continue;
        const auto gain = move_gain(g, a, v, to);
        if (gain > best_gain) {
          best_gain = gain;
          best_to = to;
        }
      }
      if (best_to >= 0 && connected_without(g, a, from, v)) {
        a.set(v, best_to);
        improved = true;
      }
    }
    for (int v = 0; v < g.vertex_count(); ++v) {
      const int pa = a.of(v);
      for (int w : g.face_neighbors(v)) {
        const int pb = a.of(w);
        if (pb == pa) continue;
        const auto gv = move_gain(g, a, v, pb);
        if (!connected_without(g, a, pa, v)) continue;
        a.set(v, pb);
        // Partner: a vertex of pb adjacent to pa whose return move completes the swap.
        int partner = -1;
        std::pair<long, int> best_total = zero;
        for (int u = 0; u < g.vertex_count(); ++u) {
          if (u == v || a.of(u) != pb) continue;
          const auto gu = move_gain(g, a, u, pa);
          const std::pair<long, int> total{gv.first + gu.first, gv.second + gu.second};
          if (total > best_total && affinity(g, a, u, pa).second > 0 &&
              connected_without(g, a, pb, u)) {
            partner = u;
            best_total = total;
          }
        }
        if (partner >= 0) {
          a.set(partner, pa);
          improved = true;
          break;
        }
        a.set(v, pa);
      }
    }
    if (!improved) break;
  }
}

bool valid(const DualGraph& g, const std::vector<int>& part, std::span<const int> lo,
           std::span<const int> hi, int k) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (int v = 0; v < g.vertex_count(); ++v) {
    const int p = part[static_cast<std::size_t>(v)];
    if (p < 0 || p >= k) return false;
    members[static_cast<std::size_t>(p)].push_back(v);
  }
  for (int p = 0; p < k; ++p) {
    const auto size = static_cast<int>(members[static_cast<std::size_t>(p)].size());
    if (size < lo[static_cast<std::size_t>(p)] || size > hi[static_cast<std::size_t>(p)]) return false;
    if (!is_connected(g, members[static_cast<std::size_t>(p)])) return false;
  }
  return true;
}

}  // namespace

PartitionMap row_striping(const DualGraph& graph, int k) {
  if (k < 1 || k > graph.vertex_count()) {
    throw ConfigError("row striping needs 1 <= k <= " + std::to_string(graph.vertex_count()));
  }
  const std::vector<double> w(static_cast<std::size_t>(k), 1.0 / k);
  const std::vector<int> sizes = integer_targets(graph.vertex_count(), w);
  return PartitionMap(chunk(snake_order(graph, true), sizes, graph.vertex_count()), k);
}

PartitionMap partition_kway(const DualGraph& graph, int k, std::span<const double> target_weights) {
  const int n = graph.vertex_count();
  if (k < 1) {
    throw ConfigError("partition needs k >= 1");
  }
  if (k > n) {
    throw ConfigError("cannot split " + std::to_string(n) + " SDs into " + std::to_string(k) +
                      " non-empty parts");
  }
  std::vector<double> weights(target_weights.begin(), target_weights.end());
  if (weights.empty()) {
    weights.assign(static_cast<std::size_t>(k), 1.0 / k);
  }
  if (weights.size() != static_cast<std::size_t>(k)) {
    throw ConfigError("expected " + std::to_string(k) + " target weights, got " +
                      std::to_string(weights.size()));
  }
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w > 0.0); }) ||
      std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("target weights must be positive and sum to 1");
  }

  std::vector<int> targets = integer_targets(n, weights);
  // Every part keeps at least one SD; take from the largest.
  for (int& t : targets) {
    if (t == 0) {
      auto big = std::max_element(targets.begin(), targets.end());
      --*big;
      t = 1;
    }
  }
  std::vector<int> lo(static_cast<std::size_t>(k));
  std::vector<int> hi(static_cast<std::size_t>(k));
  for (std::size_t p = 0; p < static_cast<std::size_t>(k); ++p) {
    const double exact = weights[p] * n;
    lo[p] = std::max(1, std::min(targets[p], static_cast<int>(std::floor(exact + 1e-12))));
    hi[p] = std::max(targets[p], static_cast<int>(std::ceil(exact - 1e-12)));
  }

  std::vector<std::vector<int>> candidates;
  if (auto grown = grow_regions(graph, targets)) candidates.push_back(std::move(*grown));
  if (auto rb = recursive_bisection(graph, targets)) candidates.push_back(std::move(*rb));
  candidates.push_back(chunk(snake_order(graph, true), targets, n));
  candidates.push_back(chunk(snake_order(graph, false), targets, n));

  std::optional<PartitionMap> best;
  std::pair<long, long> best_score{};
  for (auto& cand : candidates) {
    Assignment a(n, k);
    for (int v = 0; v < n; ++v) a.set(v, cand[static_cast<std::size_t>(v)]);
    refine(graph, a, lo, hi);
    if (!valid(graph, a.part, lo, hi, k)) continue;
    PartitionMap pm(a.part, k);
    long face_cut = 0;
    for (int v = 0; v < n; ++v) {
      for (int u : graph.face_neighbors(v)) {
        if (u > v && a.of(u) != a.of(v)) ++face_cut;
      }
    }
    const std::pair<long, long> score{edge_cut(graph, pm), face_cut};
    if (!best || score < best_score) {
      best = std::move(pm);
      best_score = score;
    }
  }
  // The snake layouts are always contiguous, so a candidate always survives.
  return *best;
}

}  // namespace nlheat
