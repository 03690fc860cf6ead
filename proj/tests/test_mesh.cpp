#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "nlheat/errors.hpp"
#include "nlheat/mesh.hpp"
#include "oracles.hpp"

using namespace nlheat;

namespace {

std::set<DpIndex> as_set(const std::vector<DpIndex>& v) { return {v.begin(), v.end()}; }

PartitionMap random_owners(int sds, int nodes, std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, nodes - 1);
  std::vector<int> owners(static_cast<std::size_t>(sds));
  for (int& o : owners) o = pick(rng);
  return PartitionMap(owners, nodes);
}

}  // namespace

TEST(DomainSpec, CountsAndCollar) {
  const DomainSpec d(20, 2);
  EXPECT_EQ(d.interior_count(), 400u);
  EXPECT_EQ(d.collar_count(), 24u * 24u - 400u);
  EXPECT_DOUBLE_EQ(d.h() * d.n(), 1.0);
  EXPECT_DOUBLE_EQ(d.epsilon(), 0.1);
  EXPECT_TRUE(d.interior({0, 19}));
  EXPECT_FALSE(d.interior({-1, 0}));
  EXPECT_TRUE(d.in_collar({-1, 0}));
  EXPECT_TRUE(d.in_collar({21, 21}));
  EXPECT_FALSE(d.in_collar({22, 0}));
  EXPECT_FALSE(d.in_collar({3, 3}));
}

TEST(BuildGrid, TwentyFiveTilesOfFour) {
  const SdGrid g = build_grid(20, 4, 2);
  EXPECT_EQ(g.count(), 25);
  EXPECT_EQ(g.sx(), 5);
  for (const SubDomain& sd : g.sds()) EXPECT_EQ(g.dps(sd.id).size(), 16u);
}

TEST(BuildGrid, SingleTileNoCollar) {
  const SdGrid g = build_grid(4, 4, 0);
  EXPECT_EQ(g.count(), 1);
  EXPECT_EQ(g.spec().collar_count(), 0u);
}

TEST(BuildGrid, SixteenBySixteen) {
  const SdGrid g = build_grid(800, 50, 8);
  EXPECT_EQ(g.count(), 256);
  EXPECT_EQ(g.sx(), 16);
  EXPECT_EQ(g.sy(), 16);
}

TEST(BuildGrid, Rejections) {
  EXPECT_THROW(build_grid(20, 3, 1), ConfigError);
  EXPECT_THROW(build_grid(20, 4, 5), ConfigError);
  EXPECT_THROW(build_grid(0, 1, 0), ConfigError);
}

TEST(BuildGrid, TilingIsExact) {
  for (auto [n, p] : {std::pair{12, 3}, {16, 4}, {30, 5}}) {
    const SdGrid g = build_grid(n, p, 1);
    std::set<DpIndex> seen;
    std::size_t total = 0;
    for (const SubDomain& sd : g.sds()) {
      for (const DpIndex& d : g.dps(sd.id)) {
        EXPECT_EQ(g.sd_of(d), sd.id);
        seen.insert(d);
        ++total;
      }
    }
    EXPECT_EQ(total, static_cast<std::size_t>(n * n));
    EXPECT_EQ(seen.size(), total);
  }
}

TEST(Stencil, SmallCounts) {
  EXPECT_EQ(build_stencil(0, 0.1).offsets, (std::vector<Offset>{{0, 0}}));
  EXPECT_EQ(build_stencil(1, 0.1).offsets.size(), 5u);
  EXPECT_EQ(build_stencil(2, 0.1).offsets.size(), 13u);
  EXPECT_EQ(build_stencil(2, 0.1, false).offsets.size(), 12u);
  EXPECT_DOUBLE_EQ(build_stencil(2, 0.1).volume, 0.1 * 0.1);
}

TEST(Stencil, MatchesEnumerationAndIsSymmetric) {
  for (int m = 0; m <= 16; ++m) {
    const Stencil s = build_stencil(m, 1.0 / 64);
    EXPECT_EQ(s.offsets, oracle::disk(m, true)) << "m=" << m;
    const std::set<Offset> set(s.offsets.begin(), s.offsets.end());
    for (const Offset& o : s.offsets) {
      EXPECT_TRUE(set.contains({-o.di, -o.dj}));
      EXPECT_LE(o.di * o.di + o.dj * o.dj, m * m);
    }
  }
}

TEST(Classify, InteriorSdHasNoCaseOne) {
  const SdGrid g = build_grid(12, 4, 2);
  const PartitionMap own = PartitionMap::single_node(g.count());
  for (int sd = 0; sd < g.count(); ++sd) {
    const DpSplit s = classify_dps(sd, g, own);
    EXPECT_TRUE(s.case1.empty());
    EXPECT_EQ(s.case2.size(), 16u);
  }
}

TEST(Classify, EastNeighbourForeign) {
  const SdGrid g = build_grid(150, 50, 8);
  std::vector<int> owners(9, 0);
  owners[5] = 1;
  const PartitionMap own(owners, 2);
  const DpSplit s = classify_dps(4, g, own);
  EXPECT_EQ(s.case1.size(), 400u);
  EXPECT_EQ(s.case2.size(), 2100u);
  for (const DpIndex& d : s.case1) EXPECT_GE(d.i, 92);
  EXPECT_EQ(foreign_dependencies(4, g, own), std::vector<int>{5});
}

TEST(Classify, MatchesBruteForce) {
  std::mt19937 rng(7);
  for (auto [n, p, m] : {std::tuple{16, 4, 2}, {24, 4, 3}, {32, 8, 5}, {64, 16, 4}}) {
    const SdGrid g = build_grid(n, p, m);
    for (int trial = 0; trial < 3; ++trial) {
      const PartitionMap own = random_owners(g.count(), 3, rng);
      for (int sd = 0; sd < g.count(); ++sd) {
        const DpSplit s = classify_dps(sd, g, own);
        EXPECT_EQ(as_set(s.case1), oracle::case1(sd, n, p, m, own));
        EXPECT_EQ(s.case1.size() + s.case2.size(), static_cast<std::size_t>(p * p));
        std::set<DpIndex> both = as_set(s.case1);
        both.insert(s.case2.begin(), s.case2.end());
        EXPECT_EQ(both.size(), static_cast<std::size_t>(p * p));
      }
    }
  }
}

TEST(GhostRegion, AdjacentPairBand) {
  const SdGrid g = build_grid(8, 4, 2);
  const PartitionMap own({0, 1, 1, 1}, 2);
  const std::vector<DpIndex> band = ghost_region(1, 0, g, own);
  EXPECT_EQ(band.size(), 8u);
  for (const DpIndex& d : band) {
    EXPECT_TRUE(d.i == 4 || d.i == 5);
    EXPECT_LT(d.j, 4);
  }
}

TEST(GhostRegion, BeyondHorizonAndLocal) {
  const SdGrid g = build_grid(12, 4, 2);
  std::vector<int> owners(9, 1);
  owners[0] = 0;
  const PartitionMap own(owners, 2);
  EXPECT_TRUE(ghost_region(2, 0, g, own).empty());
  EXPECT_TRUE(ghost_region(8, 0, g, own).empty());

  const SdGrid local = build_grid(12, 4, 0);
  for (int sd = 1; sd < 9; ++sd) EXPECT_TRUE(ghost_region(sd, 0, local, own).empty());
}

TEST(GhostRegion, MatchesBruteForceAndNeeds) {
  std::mt19937 rng(11);
  for (auto [n, p, m] : {std::tuple{16, 4, 2}, {24, 6, 4}, {20, 4, 3}}) {
    const SdGrid g = build_grid(n, p, m);
    const PartitionMap own = random_owners(g.count(), 3, rng);
    for (int src = 0; src < g.count(); ++src) {
      for (int dst = 0; dst < 3; ++dst) {
        if (own.owner(src) == dst) continue;
        const auto region = ghost_region(src, dst, g, own);
        EXPECT_EQ(as_set(region), oracle::ghost(src, dst, n, p, m, own));
        // dst needs src iff one of its SDs lists src as a foreign dependency.
        bool needed = false;
        for (int sd : own.sds_of(dst)) {
          const auto deps = foreign_dependencies(sd, g, own);
          needed = needed || std::find(deps.begin(), deps.end(), src) != deps.end();
        }
        EXPECT_EQ(needed, !region.empty());
      }
    }
  }
}

TEST(TileGhostRegion, CornerContact) {
  const SdGrid g = build_grid(8, 4, 2);
  const auto corner = tile_ghost_region(3, 0, g);
  ASSERT_EQ(corner.size(), 1u);
  EXPECT_EQ(corner[0], (DpIndex{4, 4}));
  EXPECT_EQ(tile_ghost_region(1, 0, g).size(), 8u);
}
