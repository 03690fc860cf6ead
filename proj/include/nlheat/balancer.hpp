#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlheat/partition.hpp"
#include "nlheat/partition_map.hpp"

namespace nlheat {

// Measured state of the cluster at a balancing point.
struct LoadSnapshot {
  std::vector<int> counts;    // SDs owned per node
  std::vector<double> busy;   // busy seconds per node since the last reset
  PartitionMap ownership;
  DualGraph graph;

  int nodes() const { return static_cast<int>(counts.size()); }
  int total() const;
};

// Builds a snapshot whose counts are read off `ownership`.
LoadSnapshot make_snapshot(const PartitionMap& ownership, const DualGraph& graph,
                           std::vector<double> busy);

// Throws BalanceError if counts, busy times and ownership disagree.
void validate(const LoadSnapshot& snapshot);

// Power_i = count_i / busy_i.
std::vector<double> compute_power(const LoadSnapshot& snapshot);

// E_i = total * Power_i / sum_j Power_j.
std::vector<double> expected_load(std::span<const double> powers, int total_sds);

// E_i - count_i. Positive means the node should borrow SDs.
std::vector<double> load_imbalance(std::span<const double> expected, std::span<const int> counts);

// Integer SD counts closest to `expected` that sum to the total and leave every
// node at least one SD. Ties in the remainder go to the node currently holding
// more SDs, then the lowest id.
std::vector<int> integer_loads(std::span<const double> expected, std::span<const int> counts);

// Nodes a and b are adjacent when an SD of a shares a tile face with an SD of b.
std::vector<std::vector<int>> node_adjacency(const DualGraph& graph, const PartitionMap& ownership);

struct DependencyTree {
  int root = 0;
  std::vector<int> parent;                 // -1 at the root
  std::vector<std::vector<int>> children;  // ascending ids
};

// BFS spanning tree of the node adjacency graph rooted at argmin(imbalance).
// Throws BalanceError if the adjacency graph is disconnected.
DependencyTree build_dependency_tree(std::span<const std::vector<int>> adjacency,
                                     std::span<const double> imbalance);
DependencyTree build_dependency_tree(const LoadSnapshot& snapshot);

// Root first, then repeatedly the discovered-but-unvisited node with the
// largest |imbalance| (lowest id on ties).
std::vector<int> topological_order(const DependencyTree& tree, std::span<const double> imbalance);

struct Transfer {
  int sd = 0;
  int from = 0;
  int to = 0;
  bool operator==(const Transfer&) const = default;
};

struct TransferPlan {
  std::vector<Transfer> transfers;
  bool complete = true;
  std::string diagnostic;

  bool empty() const { return transfers.empty(); }
  std::size_t size() const { return transfers.size(); }
};

struct PlanOptions {
  // On an infeasible transfer keep only the prefix that minimises the
  // resulting max |imbalance|.
  bool trim_partial = true;
};

TransferPlan plan_transfers(const LoadSnapshot& snapshot, const PlanOptions& options = {});

// Applies transfers in order. Throws BalanceError if an SD is not owned by its
// stated lender or a lender would be emptied.
void apply_plan(PartitionMap& ownership, const TransferPlan& plan);

std::string to_json(const LoadSnapshot& snapshot);
std::string to_json(const TransferPlan& plan);
LoadSnapshot snapshot_from_json(std::string_view text);
TransferPlan plan_from_json(std::string_view text);

}  // namespace nlheat
