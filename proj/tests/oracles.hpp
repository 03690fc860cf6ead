#pragma once

// Brute-force reference implementations used by the tests. Nothing here calls
// into the library beyond plain data types.

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "nlheat/mesh.hpp"
#include "nlheat/partition_map.hpp"

namespace oracle {

inline std::vector<nlheat::Offset> disk(int m, bool include_self) {
  std::vector<nlheat::Offset> out;
  for (int dj = -m; dj <= m; ++dj) {
    for (int di = -m; di <= m; ++di) {
      if (di * di + dj * dj > m * m) continue;
      if (!include_self && di == 0 && dj == 0) continue;
      out.push_back({di, dj});
    }
  }
  return out;
}

// Owner of an arbitrary lattice point, -1 for the collar.
inline int owner_at(int i, int j, int n, int p, const nlheat::PartitionMap& own) {
  if (i < 0 || j < 0 || i >= n || j >= n) return -1;
  return own.owner((j / p) * (n / p) + i / p);
}

inline int sd_at(int i, int j, int n, int p) {
  if (i < 0 || j < 0 || i >= n || j >= n) return -1;
  return (j / p) * (n / p) + i / p;
}

// Case-1 DPs of one SD: the footprint touches an interior DP of another node.
inline std::set<nlheat::DpIndex> case1(int sd, int n, int p, int m, const nlheat::PartitionMap& own) {
  std::set<nlheat::DpIndex> out;
  const int sx = n / p;
  const int i0 = (sd % sx) * p;
  const int j0 = (sd / sx) * p;
  const int me = own.owner(sd);
  for (int j = j0; j < j0 + p; ++j) {
    for (int i = i0; i < i0 + p; ++i) {
      for (const auto& o : disk(m, false)) {
        const int q = owner_at(i + o.di, j + o.dj, n, p, own);
        if (q >= 0 && q != me) {
          out.insert({i, j});
          break;
        }
      }
    }
  }
  return out;
}

// DPs of src_sd read by some DP owned by dst_node.
inline std::set<nlheat::DpIndex> ghost(int src_sd, int dst_node, int n, int p, int m,
                                       const nlheat::PartitionMap& own) {
  std::set<nlheat::DpIndex> out;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (owner_at(i, j, n, p, own) != dst_node) continue;
      for (const auto& o : disk(m, false)) {
        if (sd_at(i + o.di, j + o.dj, n, p) == src_sd) out.insert({i + o.di, j + o.dj});
      }
    }
  }
  return out;
}

// Values crossing between two SDs per step, both directions.
inline long ghost_volume(int a, int b, int n, int p, int m) {
  long total = 0;
  for (int src : {a, b}) {
    const int dst = src == a ? b : a;
    std::set<std::pair<int, int>> seen;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (sd_at(i, j, n, p) != dst) continue;
        for (const auto& o : disk(m, false)) {
          if (sd_at(i + o.di, j + o.dj, n, p) == src) seen.insert({i + o.di, j + o.dj});
        }
      }
    }
    total += static_cast<long>(seen.size());
  }
  return total;
}

// Straight-line forward Euler for the manufactured problem with the lattice
// (discrete) source; successive run() calls continue in time.
struct Serial {
  int n, m;
  double k, dt;
  std::vector<double> u;  // padded, width n + 2m
  int done = 0;           // steps taken so far

  Serial(int n_, int m_, double k_, double dt_) : n(n_), m(m_), k(k_), dt(dt_) {
    const int w = n + 2 * m;
    u.assign(static_cast<std::size_t>(w) * w, 0.0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) u[idx(i, j)] = shape(i, j);
  }

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j + m) * static_cast<std::size_t>(n + 2 * m) +
           static_cast<std::size_t>(i + m);
  }
  double h() const { return 1.0 / n; }
  double x(int i) const { return (i + 0.5) * h(); }
  static double S(double x) { return std::sin(2.0 * std::numbers::pi * x); }
  double shape(int i, int j) const {
    if (i < 0 || j < 0 || i >= n || j >= n) return 0.0;
    return S(x(i)) * S(x(j));
  }
  double c() const {
    const double eps = m * h();
    return 2.0 * k / (std::numbers::pi * std::pow(eps, 4) * 0.25);
  }

  void run(int steps) {
    const double hh = h() * h();
    const double cc = c();
    const auto offs = disk(m, false);
    std::vector<double> integral(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const auto& o : offs) acc += hh * (shape(i + o.di, j + o.dj) - shape(i, j));
        integral[static_cast<std::size_t>(j) * n + i] = acc;
      }
    }
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> next = u;
    for (int s = 0; s < steps; ++s) {
      const double t = (done + s) * dt;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double ui = u[idx(i, j)];
          double acc = 0.0;
          for (const auto& o : offs) acc += hh * (u[idx(i + o.di, j + o.dj)] - ui);
          const double b = -two_pi * std::sin(two_pi * t) * shape(i, j) -
                           cc * std::cos(two_pi * t) * integral[static_cast<std::size_t>(j) * n + i];
          next[idx(i, j)] = ui + dt * (b + cc * acc);
        }
      }
      u.swap(next);
    }
    done += steps;
  }

  double at(int i, int j) const { return u[idx(i, j)]; }
};

}  // namespace oracle
