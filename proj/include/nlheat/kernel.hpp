#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nlheat/mesh.hpp"

namespace nlheat {

// Influence function J(r) on the normalised distance r = |y - x| / eps.
enum class Influence { constant };

double influence(Influence kind, double r);

// i-th moment of J over r in [0, 1].
double influence_moment(Influence kind, int i);

// Conductivity constant c relating the nonlocal operator to the classical
// heat equation with conductivity k, for dimension d in {1, 2}.
double conductivity_constant(double k, double epsilon, int d, Influence kind = Influence::constant);

struct ModelParams {
  double conductivity = 1.0;
  double epsilon = 0.0;
  double h = 0.0;
  int m = 0;
  Influence influence = Influence::constant;
  double c = 0.0;
};

// 2D model on the given domain. When m == 0 the model is purely local and c
// is left at zero.
ModelParams make_model(double conductivity, const DomainSpec& spec,
                       Influence kind = Influence::constant);

// Temperature over the padded grid K u K_c. Collar values are zero on
// construction and are never written by the stepping code.
class Field {
 public:
  Field() = default;
  explicit Field(const DomainSpec& spec, double interior_value = 0.0);

  const DomainSpec& spec() const { return spec_; }

  std::size_t index(int i, int j) const {
    const auto w = static_cast<std::size_t>(spec_.padded());
    return static_cast<std::size_t>(j + spec_.m()) * w + static_cast<std::size_t>(i + spec_.m());
  }
  std::size_t index(DpIndex d) const { return index(d.i, d.j); }

  double operator()(int i, int j) const { return values_[index(i, j)]; }
  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator[](DpIndex d) const { return values_[index(d)]; }
  double& operator[](DpIndex d) { return values_[index(d)]; }

  std::span<double> raw() { return values_; }
  std::span<const double> raw() const { return values_; }

  // Marks every interior value as not yet delivered.
  void poison_interior();

  int step = 0;
  double time = 0.0;

 private:
  DomainSpec spec_{1, 0};
  std::vector<double> values_;
};

// Quiet NaN with a recognisable payload standing for a value that has not
// been delivered to this node. Arithmetic never produces this bit pattern.
double missing_value();
bool is_missing(double v);

// Stencil flattened against a padded row width, self offset dropped. Each
// entry carries J(|delta| h / eps) * V so the sum is
//   acc = sum_o weight[o] * (u[i + o] - u[i])   (row-major offset order)
//   rhs = c * acc
// which is the single evaluation order every code path uses.
struct FlatStencil {
  std::vector<std::ptrdiff_t> offset;
  std::vector<double> weight;
  std::vector<Offset> lattice;
};

FlatStencil flatten(const Stencil& stencil, const ModelParams& params, int padded_width);

// Nonlocal term at one interior DP. Throws MissingValueError if any footprint
// value is the missing sentinel.
double nonlocal_rhs(const Field& field, DpIndex i, const Stencil& stencil,
                    const ModelParams& params);

using SourceFn = std::function<double(double t, DpIndex i)>;

// Forward-Euler update for a set of DPs:
//   next[i] = cur[i] + dt * (b(t, x_i) + rhs(i))
// Reads only `cur`, writes only the listed DPs of `next`. `repeats` > 1 runs
// the stencil loop that many times and discards the extra results (simulated
// slower hardware). Throws MissingValueError on an undelivered value.
void step_points(const Field& cur, Field& next, std::span<const DpIndex> points, double t,
                 double dt, const SourceFn& source, const FlatStencil& stencil,
                 const ModelParams& params, int repeats = 1);

// One step of every DP of `sd` (step_sd); collar untouched.
void step_sd(const Field& cur, Field& next, int sd, const SdGrid& grid, double t, double dt,
             const SourceFn& source, const Stencil& stencil, const ModelParams& params);

// Largest forward-Euler timestep from the Gershgorin bound, 1 / (c sum J h^2).
// +infinity when the operator vanishes (m = 0 or c = 0).
double stable_dt(const ModelParams& params, const Stencil& stencil);

// Manufactured solution w(t, x) = cos(2 pi t) sin(2 pi x1) sin(2 pi x2) on D,
// zero outside.
double exact_solution(double t, double x1, double x2);

enum class SourceMode { discrete, refined };

// Sub-cells per grid spacing used by the refined source quadrature.
inline constexpr int kRefinement = 4;

// Source b(t, x_i) = dw/dt - c * integral_{B_eps} J (w(t,y) - w(t,x_i)) dy.
// `discrete` evaluates the integral with the lattice stencil sum itself;
// `refined` uses midpoint quadrature on a kRefinement-times finer sub-grid of
// the disk. Direct, uncached evaluation.
double manufactured_source(double t, DpIndex i, const DomainSpec& spec, const ModelParams& params,
                           SourceMode mode);

// Same source with the spatial parts precomputed once per DP. w separates as
// cos(2 pi t) S(x), so b(t, x) = -2 pi sin(2 pi t) S(x) - c cos(2 pi t) I(x).
class ManufacturedSource {
 public:
  ManufacturedSource(const DomainSpec& spec, const ModelParams& params, SourceMode mode);

  double operator()(double t, DpIndex i) const;
  SourceFn as_function() const;

  SourceMode mode() const { return mode_; }

 private:
  DomainSpec spec_;
  double c_;
  SourceMode mode_;
  std::vector<double> shape_;     // S(x_i)
  std::vector<double> integral_;  // integral of J (S(y) - S(x_i)) dy
};

// Initial field u0 = w(0, .) on K, zero collar.
Field manufactured_initial(const DomainSpec& spec);

// e = h^2 sum_{i in K} |w(t, x_i) - u_i|^2.
double error_l2(const Field& field, double t);

}  // namespace nlheat
