#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "nlheat/errors.hpp"
#include "nlheat/partition.hpp"
#include "oracles.hpp"

using namespace nlheat;

namespace {

void expect_valid(const DualGraph& g, const PartitionMap& pm, int k) {
  ASSERT_EQ(pm.nodes(), k);
  ASSERT_EQ(pm.sd_count(), g.vertex_count());
  const auto counts = pm.counts();
  EXPECT_LE(*std::max_element(counts.begin(), counts.end()) -
                *std::min_element(counts.begin(), counts.end()),
            1);
  for (int part = 0; part < k; ++part) EXPECT_TRUE(is_contiguous(g, pm, part)) << "part " << part;
}

}  // namespace

TEST(DualGraph, TwoTilesSingleFaceEdge) {
  // 2x2 tiles: the face pair 0-1 carries the 2x4 band each way.
  const DualGraph g = build_dual_graph(build_grid(8, 4, 2));
  EXPECT_EQ(g.weight(0, 1), 16);
  EXPECT_EQ(g.weight(1, 0), 16);
  EXPECT_EQ(g.weight(0, 3), 2);
  EXPECT_EQ(g.weight(0, 0), 0);
}

TEST(DualGraph, WeightsMatchBruteForce) {
  for (auto [n, p, m] : {std::tuple{12, 4, 2}, {15, 5, 3}, {16, 4, 4}}) {
    const DualGraph g = build_dual_graph(build_grid(n, p, m));
    for (int a = 0; a < g.vertex_count(); ++a) {
      for (int b = 0; b < g.vertex_count(); ++b) {
        if (a == b) continue;
        EXPECT_EQ(g.weight(a, b), oracle::ghost_volume(a, b, n, p, m)) << a << "-" << b;
      }
    }
  }
}

TEST(DualGraph, LocalModelEdgeless) {
  const DualGraph g = build_dual_graph(build_grid(12, 4, 0));
  EXPECT_EQ(g.total_weight(), 0);
  for (int v = 0; v < g.vertex_count(); ++v) EXPECT_TRUE(g.neighbors(v).empty());
}

TEST(DualGraph, InteriorDegreeEight) {
  const DualGraph g = build_dual_graph(build_grid(20, 4, 2));
  EXPECT_EQ(g.neighbors(12).size(), 8u);
  EXPECT_EQ(g.neighbors(0).size(), 3u);
  EXPECT_EQ(g.face_neighbors(12), (std::vector<int>{7, 11, 13, 17}));
}

TEST(PartitionKway, TwentyFiveOverFour) {
  const DualGraph g = build_dual_graph(build_grid(20, 4, 2));
  const PartitionMap pm = partition_kway(g, 4);
  expect_valid(g, pm, 4);
  auto counts = pm.counts();
  std::sort(counts.begin(), counts.end());
  EXPECT_EQ(counts, (std::vector<int>{6, 6, 6, 7}));
  EXPECT_LE(edge_cut(g, pm), edge_cut(g, row_striping(g, 4)));
}

TEST(PartitionKway, SinglePart) {
  const DualGraph g = build_dual_graph(build_grid(20, 4, 2));
  const PartitionMap pm = partition_kway(g, 1);
  EXPECT_EQ(edge_cut(g, pm), 0);
  EXPECT_TRUE(is_contiguous(g, pm, 0));
}

TEST(PartitionKway, SixteenBySixteen) {
  const DualGraph g = build_dual_graph(build_grid(64, 4, 2));
  for (int k : {2, 4, 8}) {
    const PartitionMap pm = partition_kway(g, k);
    expect_valid(g, pm, k);
    EXPECT_LE(edge_cut(g, pm), edge_cut(g, row_striping(g, k))) << "k=" << k;
  }
}

TEST(PartitionKway, NoWorseThanQuadrants) {
  const DualGraph g = build_dual_graph(build_grid(64, 4, 2));
  std::vector<int> owners(256);
  for (int v = 0; v < 256; ++v) owners[static_cast<std::size_t>(v)] = (g.ty(v) / 8) * 2 + g.tx(v) / 8;
  const PartitionMap quadrants(owners, 4);
  const PartitionMap pm = partition_kway(g, 4);
  EXPECT_EQ(pm.counts(), (std::vector<int>{64, 64, 64, 64}));
  EXPECT_LE(edge_cut(g, pm), edge_cut(g, quadrants));
}

TEST(PartitionKway, ExhaustiveThreeByThree) {
  const int n = 12, p = 4, m = 2;
  const DualGraph g = build_dual_graph(build_grid(n, p, m));
  long best = std::numeric_limits<long>::max();
  for (int mask = 0; mask < (1 << 9); ++mask) {
    const int ones = __builtin_popcount(static_cast<unsigned>(mask));
    if (ones != 4 && ones != 5) continue;
    long cut = 0;
    for (int a = 0; a < 9; ++a)
      for (int b = a + 1; b < 9; ++b)
        if (((mask >> a) & 1) != ((mask >> b) & 1)) cut += oracle::ghost_volume(a, b, n, p, m);
    best = std::min(best, cut);
  }
  const PartitionMap pm = partition_kway(g, 2);
  expect_valid(g, pm, 2);
  EXPECT_LE(edge_cut(g, pm), best * 3 / 2);
}

TEST(PartitionKway, Deterministic) {
  const DualGraph g = build_dual_graph(build_grid(48, 4, 3));
  EXPECT_EQ(partition_kway(g, 5), partition_kway(g, 5));
}

TEST(PartitionKway, WeightedTargets) {
  const DualGraph g = build_dual_graph(build_grid(20, 4, 2));
  const std::vector<double> w{0.4, 0.4, 0.1, 0.1};
  const PartitionMap pm = partition_kway(g, 4, w);
  EXPECT_EQ(pm.counts(), integer_targets(25, w));
  for (int part = 0; part < 4; ++part) EXPECT_TRUE(is_contiguous(g, pm, part));
}

TEST(PartitionKway, Rejections) {
  const DualGraph g = build_dual_graph(build_grid(8, 4, 2));
  EXPECT_THROW(partition_kway(g, 5), ConfigError);
  EXPECT_THROW(partition_kway(g, 0), ConfigError);
  const std::vector<double> bad{0.5, 0.6};
  EXPECT_THROW(partition_kway(g, 2, bad), ConfigError);
}

TEST(EdgeCut, Examples) {
  const DualGraph g = build_dual_graph(build_grid(8, 4, 2));
  EXPECT_EQ(edge_cut(g, PartitionMap::single_node(4)), 0);
  // Column split cuts two face edges and both diagonals.
  const PartitionMap cols({0, 1, 0, 1}, 2);
  EXPECT_EQ(edge_cut(g, cols), 16 + 16 + 2 + 2);
}

TEST(Contiguity, Examples) {
  const DualGraph g = build_dual_graph(build_grid(8, 4, 2));
  EXPECT_TRUE(is_contiguous(g, PartitionMap({0, 1, 1, 1}, 2), 0));
  EXPECT_FALSE(is_contiguous(g, PartitionMap({0, 1, 1, 0}, 2), 0));
  EXPECT_TRUE(is_contiguous(g, PartitionMap({0, 0, 0, 0}, 2), 1));
}

TEST(Contiguity, FourBlockLayout) {
  // Four SPs on 5x5 tiles, each a connected block.
  const DualGraph g = build_dual_graph(build_grid(20, 4, 2));
  const PartitionMap pm({0, 0, 0, 1, 1,
                         0, 0, 0, 1, 1,
                         2, 2, 3, 1, 1,
                         2, 2, 3, 3, 3,
                         2, 2, 3, 3, 3}, 4);
  for (int part = 0; part < 4; ++part) EXPECT_TRUE(is_contiguous(g, pm, part));
  EXPECT_EQ(pm.counts(), (std::vector<int>{6, 6, 6, 7}));
}

TEST(RowStriping, RunsAreContiguousAndBalanced) {
  const DualGraph g = build_dual_graph(build_grid(28, 4, 2));
  for (int k = 1; k <= 10; ++k) expect_valid(g, row_striping(g, k), k);
}

TEST(IntegerTargets, LargestRemainder) {
  EXPECT_EQ(integer_targets(25, std::vector<double>{0.25, 0.25, 0.25, 0.25}),
            (std::vector<int>{7, 6, 6, 6}));
  const std::vector<double> w{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto t = integer_targets(10, w);
  EXPECT_EQ(std::accumulate(t.begin(), t.end(), 0), 10);
}
