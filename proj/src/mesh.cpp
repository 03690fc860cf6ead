#include "nlheat/mesh.hpp"

#include <algorithm>
#include <string>

#include "nlheat/errors.hpp"

namespace nlheat {

DomainSpec::DomainSpec(int n, int m) : n_(n), m_(m) {
  if (n < 1) {
    throw ConfigError("mesh needs n >= 1, got " + std::to_string(n));
  }
  if (m < 0) {
    throw ConfigError("horizon multiple m must be >= 0, got " + std::to_string(m));
  }
}

bool DomainSpec::in_collar(DpIndex d) const {
  const bool in_padded = d.i >= -m_ && d.i < n_ + m_ && d.j >= -m_ && d.j < n_ + m_;
  return in_padded && !interior(d);
}

std::size_t DomainSpec::interior_count() const {
  return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
}

std::size_t DomainSpec::collar_count() const {
  const auto w = static_cast<std::size_t>(padded());
  return w * w - interior_count();
}

SdGrid::SdGrid(DomainSpec spec, int p) : spec_(spec), p_(p) {
  if (p < 1) {
    throw ConfigError("SD size p must be >= 1, got " + std::to_string(p));
  }
  if (spec.n() % p != 0) {
    throw ConfigError("SD size p=" + std::to_string(p) + " does not divide n=" +
                      std::to_string(spec.n()));
  }
  if (p < spec.m()) {
    throw ConfigError("SD size p=" + std::to_string(p) + " is smaller than the horizon m=" +
                      std::to_string(spec.m()) +
                      "; SDs would need data from beyond their immediate neighbours");
  }
  sx_ = spec.n() / p;
  sy_ = sx_;
  sds_.reserve(static_cast<std::size_t>(sx_ * sy_));
  for (int ty = 0; ty < sy_; ++ty) {
    for (int tx = 0; tx < sx_; ++tx) {
      sds_.push_back(SubDomain{sd_at(tx, ty), tx, ty, tx * p, ty * p});
    }
  }
}

std::vector<DpIndex> SdGrid::dps(int sd) const {
  const SubDomain& t = this->sd(sd);
  std::vector<DpIndex> out;
  out.reserve(static_cast<std::size_t>(p_ * p_));
  for (int j = t.j0; j < t.j0 + p_; ++j) {
    for (int i = t.i0; i < t.i0 + p_; ++i) {
      out.push_back({i, j});
    }
  }
  return out;
}

SdGrid build_grid(int n, int p, int m) { return SdGrid(DomainSpec(n, m), p); }

Stencil build_stencil(int m, double h, bool include_self) {
  if (m < 0) {
    throw ConfigError("horizon multiple m must be >= 0");
  }
  Stencil s;
  s.m = m;
  s.volume = h * h;
  s.includes_self = include_self;
  for (int dj = -m; dj <= m; ++dj) {
    for (int di = -m; di <= m; ++di) {
      if (di * di + dj * dj > m * m) {
        continue;
      }
      if (di == 0 && dj == 0 && !include_self) {
        continue;
      }
      s.offsets.push_back({di, dj});
    }
  }
  return s;
}

int tile_distance2(DpIndex d, const SubDomain& tile, int p) {
  const int dx = std::max({tile.i0 - d.i, 0, d.i - (tile.i0 + p - 1)});
  const int dy = std::max({tile.j0 - d.j, 0, d.j - (tile.j0 + p - 1)});
  return dx * dx + dy * dy;
}

namespace {

// Tiles in the 3x3 block around `sd`, excluding `sd` itself. With p >= m no
// other tile can be within the horizon.
std::vector<int> neighbour_tiles(int sd, const SdGrid& grid) {
  const SubDomain& t = grid.sd(sd);
  std::vector<int> out;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int tx = t.tx + dx;
      const int ty = t.ty + dy;
      if ((dx == 0 && dy == 0) || tx < 0 || ty < 0 || tx >= grid.sx() || ty >= grid.sy()) {
        continue;
      }
      out.push_back(grid.sd_at(tx, ty));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

DpSplit classify_dps(int sd, const SdGrid& grid, const PartitionMap& ownership) {
  const int owner = ownership.owner(sd);
  const int m2 = grid.spec().m() * grid.spec().m();
  const int p = grid.p();

  std::vector<const SubDomain*> foreign;
  for (int nb : neighbour_tiles(sd, grid)) {
    if (ownership.owner(nb) != owner) {
      foreign.push_back(&grid.sd(nb));
    }
  }

  DpSplit split;
  for (const DpIndex& d : grid.dps(sd)) {
    const bool needs_foreign = std::any_of(foreign.begin(), foreign.end(), [&](const SubDomain* t) {
      return tile_distance2(d, *t, p) <= m2;
    });
    (needs_foreign ? split.case1 : split.case2).push_back(d);
  }
  return split;
}

std::vector<int> foreign_dependencies(int sd, const SdGrid& grid, const PartitionMap& ownership) {
  const int owner = ownership.owner(sd);
  const int m = grid.spec().m();
  std::vector<int> out;
  if (m == 0) {
    return out;
  }
  const SubDomain& self = grid.sd(sd);
  const int p = grid.p();
  for (int nb : neighbour_tiles(sd, grid)) {
    if (ownership.owner(nb) == owner) {
      continue;
    }
    // Nearest pair of DPs between the two tiles decides whether any footprint
    // crosses; it is a corner or edge DP of `self`.
    const SubDomain& t = grid.sd(nb);
    const int dx = std::max({t.i0 - (self.i0 + p - 1), 0, self.i0 - (t.i0 + p - 1)});
    const int dy = std::max({t.j0 - (self.j0 + p - 1), 0, self.j0 - (t.j0 + p - 1)});
    if (dx * dx + dy * dy <= m * m) {
      out.push_back(nb);
    }
  }
  return out;
}

std::vector<DpIndex> tile_ghost_region(int src_sd, int dst_sd, const SdGrid& grid) {
  std::vector<DpIndex> out;
  if (src_sd == dst_sd) {
    return out;
  }
  const int m2 = grid.spec().m() * grid.spec().m();
  const SubDomain& dst = grid.sd(dst_sd);
  for (const DpIndex& d : grid.dps(src_sd)) {
    if (tile_distance2(d, dst, grid.p()) <= m2) {
      out.push_back(d);
    }
  }
  return out;
}

std::vector<DpIndex> ghost_region(int src_sd, int dst_node, const SdGrid& grid,
                                  const PartitionMap& ownership) {
  std::vector<DpIndex> out;
  if (ownership.owner(src_sd) == dst_node) {
    return out;
  }
  std::vector<const SubDomain*> targets;
  for (int nb : neighbour_tiles(src_sd, grid)) {
    if (ownership.owner(nb) == dst_node) {
      targets.push_back(&grid.sd(nb));
    }
  }
  if (targets.empty()) {
    return out;
  }
  const int m2 = grid.spec().m() * grid.spec().m();
  for (const DpIndex& d : grid.dps(src_sd)) {
    const bool needed = std::any_of(targets.begin(), targets.end(), [&](const SubDomain* t) {
      return tile_distance2(d, *t, grid.p()) <= m2;
    });
    if (needed) {
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace nlheat
