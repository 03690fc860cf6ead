#pragma once

#include <span>
#include <vector>

#include "nlheat/mesh.hpp"
#include "nlheat/partition_map.hpp"

namespace nlheat {

// SD-level dependency graph. Vertices are SD ids laid out on an sx x sy tile
// grid; an edge joins two SDs whose DPs read each other's values, weighted by
// the number of DP values crossing per timestep in both directions.
//
// Contiguity is judged on tile 4-adjacency, which is independent of the
// ghost edges (those also include corner contacts and vanish when m = 0).
class DualGraph {
 public:
  struct Edge {
    int to = 0;
    long weight = 0;
  };

  DualGraph(int sx, int sy, std::vector<std::vector<Edge>> adjacency);

  int vertex_count() const { return sx_ * sy_; }
  int sx() const { return sx_; }
  int sy() const { return sy_; }
  int tx(int v) const { return v % sx_; }
  int ty(int v) const { return v / sx_; }

  std::span<const Edge> neighbors(int v) const { return adjacency_[static_cast<std::size_t>(v)]; }
  long weight(int a, int b) const;
  long total_weight() const;

  // Tile 4-neighbours in ascending id order.
  const std::vector<int>& face_neighbors(int v) const {
    return faces_[static_cast<std::size_t>(v)];
  }

 private:
  int sx_;
  int sy_;
  std::vector<std::vector<Edge>> adjacency_;
  std::vector<std::vector<int>> faces_;
};

DualGraph build_dual_graph(const SdGrid& grid);

// Contiguous, balanced, low-cut k-way partition. `target_weights` are
// per-part fractions summing to 1; empty means uniform. Throws ConfigError if
// k exceeds the vertex count or the weights are malformed.
PartitionMap partition_kway(const DualGraph& graph, int k,
                            std::span<const double> target_weights = {});

long edge_cut(const DualGraph& graph, const PartitionMap& pmap);

// True iff the SDs of `part` form one 4-connected set (vacuously for an
// empty part).
bool is_contiguous(const DualGraph& graph, const PartitionMap& pmap, int part);

// True iff `members` (a set of SD ids) is 4-connected.
bool is_connected(const DualGraph& graph, std::span<const int> members);

// Reference layout: SDs in boustrophedon row order cut into k consecutive
// runs of near-equal size. Every run is contiguous.
PartitionMap row_striping(const DualGraph& graph, int k);

// Integer part sizes closest to weights * total (largest remainder, ties to
// the lowest part id).
std::vector<int> integer_targets(int total, std::span<const double> weights);

}  // namespace nlheat
