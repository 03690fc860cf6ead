#pragma once

#include <span>
#include <vector>

namespace nlheat {

// Ownership of every sub-domain by a compute node. The set of SDs owned by
// one node is that node's sub-problem (SP).
class PartitionMap {
 public:
  PartitionMap() = default;
  PartitionMap(std::vector<int> owners, int nodes);

  // Every SD on node 0 of a one-node cluster.
  static PartitionMap single_node(int sd_count);

  int owner(int sd) const { return owners_[static_cast<std::size_t>(sd)]; }
  void assign(int sd, int node);

  int nodes() const { return nodes_; }
  int sd_count() const { return static_cast<int>(owners_.size()); }
  std::span<const int> owners() const { return owners_; }

  std::vector<int> counts() const;
  std::vector<int> sds_of(int node) const;

  bool operator==(const PartitionMap&) const = default;

 private:
  std::vector<int> owners_;
  int nodes_ = 0;
};

}  // namespace nlheat
