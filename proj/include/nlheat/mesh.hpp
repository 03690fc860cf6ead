#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "nlheat/partition_map.hpp"

namespace nlheat {

// Integer grid coordinates of a discretized point (DP). Interior points
// (index set K) have 0 <= i, j < n; the collar K_c extends m points beyond
// that on every side.
struct DpIndex {
  int i = 0;
  int j = 0;
  auto operator<=>(const DpIndex&) const = default;
};

// Uniform n x n grid over the unit square plus an m-wide zero collar. The
// horizon is an integer multiple of the spacing: epsilon = m * h.
//
// Points sit at cell centres, x_i = (i + 1/2) h, so every interior point lies
// inside D = [0,1]^2 and every collar point inside (-eps, 1 + eps)^2 \ D.
class DomainSpec {
 public:
  DomainSpec(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  double h() const { return 1.0 / n_; }
  double epsilon() const { return m_ * h(); }

  // Points per axis including the collar on both sides.
  int padded() const { return n_ + 2 * m_; }

  double coord(int i) const { return (i + 0.5) * h(); }

  bool interior(DpIndex d) const { return d.i >= 0 && d.i < n_ && d.j >= 0 && d.j < n_; }
  bool in_collar(DpIndex d) const;

  std::size_t interior_count() const;
  std::size_t collar_count() const;

 private:
  int n_;
  int m_;
};

// One square tile of p x p DPs. Tile coordinates (tx, ty) count tiles along
// each axis; (i0, j0) is the first interior DP of the tile.
struct SubDomain {
  int id = 0;
  int tx = 0;
  int ty = 0;
  int i0 = 0;
  int j0 = 0;
};

class SdGrid {
 public:
  SdGrid(DomainSpec spec, int p);

  const DomainSpec& spec() const { return spec_; }
  int p() const { return p_; }
  int sx() const { return sx_; }
  int sy() const { return sy_; }
  int count() const { return sx_ * sy_; }

  const SubDomain& sd(int id) const { return sds_[static_cast<std::size_t>(id)]; }
  const std::vector<SubDomain>& sds() const { return sds_; }

  int sd_at(int tx, int ty) const { return ty * sx_ + tx; }
  // SD containing an interior DP.
  int sd_of(DpIndex d) const { return sd_at(d.i / p_, d.j / p_); }

  // All DPs of one SD in row-major order.
  std::vector<DpIndex> dps(int sd) const;

 private:
  DomainSpec spec_;
  int p_;
  int sx_;
  int sy_;
  std::vector<SubDomain> sds_;
};

// Validating factory; throws ConfigError when p does not divide n or p < m.
SdGrid build_grid(int n, int p, int m);

struct Offset {
  int di = 0;
  int dj = 0;
  auto operator<=>(const Offset&) const = default;
};

// All lattice offsets inside the closed disk of radius m, in row-major order
// (dj outer, di inner). Each neighbour carries the area weight h^2.
struct Stencil {
  int m = 0;
  double volume = 0.0;
  bool includes_self = false;
  std::vector<Offset> offsets;
};

Stencil build_stencil(int m, double h, bool include_self = true);

// Squared lattice distance from a DP to the nearest DP of a tile.
int tile_distance2(DpIndex d, const SubDomain& tile, int p);

struct DpSplit {
  std::vector<DpIndex> case1;  // footprint touches an SD of another node
  std::vector<DpIndex> case2;  // footprint stays on the owner or the collar
};

DpSplit classify_dps(int sd, const SdGrid& grid, const PartitionMap& ownership);

// Foreign SDs whose values some DP of `sd` reads, ascending by SD id.
std::vector<int> foreign_dependencies(int sd, const SdGrid& grid, const PartitionMap& ownership);

// DPs of src_sd that lie inside the footprint of some DP owned by dst_node,
// row-major. Empty when src_sd is beyond the horizon of dst_node's SP.
std::vector<DpIndex> ghost_region(int src_sd, int dst_node, const SdGrid& grid,
                                  const PartitionMap& ownership);

// DPs of src_sd within the footprint of any DP of dst_sd.
std::vector<DpIndex> tile_ghost_region(int src_sd, int dst_sd, const SdGrid& grid);

}  // namespace nlheat
