#include "nlheat/partition_map.hpp"

#include <string>

#include "nlheat/errors.hpp"

namespace nlheat {

PartitionMap::PartitionMap(std::vector<int> owners, int nodes)
    : owners_(std::move(owners)), nodes_(nodes) {
  if (nodes_ < 1) {
    throw ConfigError("partition map needs at least one node");
  }
  for (std::size_t sd = 0; sd < owners_.size(); ++sd) {
    if (owners_[sd] < 0 || owners_[sd] >= nodes_) {
      throw ConfigError("SD " + std::to_string(sd) + " assigned to node " +
                        std::to_string(owners_[sd]) + " outside [0, " +
                        std::to_string(nodes_) + ")");
    }
  }
}

PartitionMap PartitionMap::single_node(int sd_count) {
  return PartitionMap(std::vector<int>(static_cast<std::size_t>(sd_count), 0), 1);
}

void PartitionMap::assign(int sd, int node) {
  if (node < 0 || node >= nodes_) {
    throw ConfigError("node id " + std::to_string(node) + " out of range");
  }
  owners_.at(static_cast<std::size_t>(sd)) = node;
}

std::vector<int> PartitionMap::counts() const {
  std::vector<int> out(static_cast<std::size_t>(nodes_), 0);
  for (int o : owners_) {
    ++out[static_cast<std::size_t>(o)];
  }
  return out;
}

std::vector<int> PartitionMap::sds_of(int node) const {
  std::vector<int> out;
  for (std::size_t sd = 0; sd < owners_.size(); ++sd) {
    if (owners_[sd] == node) {
      out.push_back(static_cast<int>(sd));
    }
  }
  return out;
}

}  // namespace nlheat
