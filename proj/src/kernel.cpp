#include "nlheat/kernel.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nlheat/errors.hpp"

namespace nlheat {

namespace {

constexpr std::uint64_t kMissingBits = 0x7ff80000deadbeefULL;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Keeps a value live so repeated kernel passes are not optimised away.
inline void keep(double& v) { asm volatile("" : "+x"(v)); }

double shape(double x1, double x2) {
  if (x1 < 0.0 || x1 > 1.0 || x2 < 0.0 || x2 > 1.0) {
    return 0.0;
  }
  return std::sin(kTwoPi * x1) * std::sin(kTwoPi * x2);
}

std::string describe(DpIndex d) {
  return "(" + std::to_string(d.i) + "," + std::to_string(d.j) + ")";
}

[[noreturn]] void report_missing(const Field& field, DpIndex i, const FlatStencil& stencil) {
  for (const Offset& o : stencil.lattice) {
    const DpIndex j{i.i + o.di, i.j + o.dj};
    if (is_missing(field[j])) {
      throw MissingValueError("DP " + describe(i) + " reads undelivered value at " + describe(j));
    }
  }
  throw MissingValueError("DP " + describe(i) + " has an undelivered value");
}

// Integral of J (S(y) - S(x)) over the eps-disk around x by midpoint
// quadrature on a grid of spacing h / kRefinement aligned with x.
double refined_integral(const DomainSpec& spec, const ModelParams& params, double x1, double x2) {
  const int r = kRefinement * params.m;
  const double sub = spec.h() / kRefinement;
  const double area = sub * sub;
  const double centre = shape(x1, x2);
  double acc = 0.0;
  for (int b = -r; b < r; ++b) {
    const double oy = (b + 0.5) * sub;
    for (int a = -r; a < r; ++a) {
      const double ox = (a + 0.5) * sub;
      const double dist2 = (a + 0.5) * (a + 0.5) + (b + 0.5) * (b + 0.5);
      if (dist2 > static_cast<double>(r) * r) {
        continue;
      }
      const double rho = std::sqrt(dist2) / r;
      acc += influence(params.influence, rho) * area * (shape(x1 + ox, x2 + oy) - centre);
    }
  }
  return acc;
}

double lattice_integral(const DomainSpec& spec, const ModelParams& params, const Stencil& stencil,
                        DpIndex i) {
  const double centre = shape(spec.coord(i.i), spec.coord(i.j));
  double acc = 0.0;
  for (const Offset& o : stencil.offsets) {
    const double rho = params.m == 0 ? 0.0 : std::hypot(o.di, o.dj) / params.m;
    const double w = influence(params.influence, rho) * stencil.volume;
    acc += w * (shape(spec.coord(i.i + o.di), spec.coord(i.j + o.dj)) - centre);
  }
  return acc;
}

}  // namespace

double influence(Influence kind, double r) {
  switch (kind) {
    case Influence::constant:
      return (r >= 0.0 && r <= 1.0) ? 1.0 : 0.0;
  }
  return 0.0;
}

double influence_moment(Influence kind, int i) {
  switch (kind) {
    case Influence::constant:
      return 1.0 / (i + 1);
  }
  return 0.0;
}

double conductivity_constant(double k, double epsilon, int d, Influence kind) {
  if (!(epsilon > 0.0)) {
    throw ConfigError("conductivity constant needs epsilon > 0");
  }
  switch (d) {
    case 1:
      return k / (epsilon * epsilon * epsilon * influence_moment(kind, 2));
    case 2:
      return 2.0 * k / (std::numbers::pi * std::pow(epsilon, 4) * influence_moment(kind, 3));
    default:
      throw ConfigError("conductivity constant supports d = 1 or 2, got " + std::to_string(d));
  }
}

ModelParams make_model(double conductivity, const DomainSpec& spec, Influence kind) {
  ModelParams p;
  p.conductivity = conductivity;
  p.h = spec.h();
  p.m = spec.m();
  p.epsilon = spec.epsilon();
  p.influence = kind;
  p.c = spec.m() > 0 ? conductivity_constant(conductivity, p.epsilon, 2, kind) : 0.0;
  return p;
}

Field::Field(const DomainSpec& spec, double interior_value)
    : spec_(spec),
      values_(static_cast<std::size_t>(spec.padded()) * static_cast<std::size_t>(spec.padded()),
              0.0) {
  for (int j = 0; j < spec.n(); ++j) {
    for (int i = 0; i < spec.n(); ++i) {
      (*this)(i, j) = interior_value;
    }
  }
}

void Field::poison_interior() {
  const double miss = missing_value();
  for (int j = 0; j < spec_.n(); ++j) {
    for (int i = 0; i < spec_.n(); ++i) {
      (*this)(i, j) = miss;
    }
  }
}

double missing_value() { return std::bit_cast<double>(kMissingBits); }

bool is_missing(double v) { return std::bit_cast<std::uint64_t>(v) == kMissingBits; }

FlatStencil flatten(const Stencil& stencil, const ModelParams& params, int padded_width) {
  FlatStencil flat;
  for (const Offset& o : stencil.offsets) {
    if (o.di == 0 && o.dj == 0) {
      continue;
    }
    const double rho = std::hypot(o.di, o.dj) / stencil.m;
    flat.offset.push_back(static_cast<std::ptrdiff_t>(o.dj) * padded_width + o.di);
    flat.weight.push_back(influence(params.influence, rho) * stencil.volume);
    flat.lattice.push_back(o);
  }
  return flat;
}

double nonlocal_rhs(const Field& field, DpIndex i, const Stencil& stencil,
                    const ModelParams& params) {
  const FlatStencil flat = flatten(stencil, params, field.spec().padded());
  const double* base = field.raw().data() + field.index(i);
  const double ui = *base;
  if (is_missing(ui)) {
    throw MissingValueError("DP " + describe(i) + " itself is undelivered");
  }
  double acc = 0.0;
  for (std::size_t o = 0; o < flat.offset.size(); ++o) {
    const double uj = base[flat.offset[o]];
    if (is_missing(uj)) {
      report_missing(field, i, flat);
    }
    acc += flat.weight[o] * (uj - ui);
  }
  return params.c * acc;
}

void step_points(const Field& cur, Field& next, std::span<const DpIndex> points, double t,
                 double dt, const SourceFn& source, const FlatStencil& stencil,
                 const ModelParams& params, int repeats) {
  const double* u = cur.raw().data();
  double* out = next.raw().data();
  const std::size_t terms = stencil.offset.size();
  const std::ptrdiff_t* off = stencil.offset.data();
  const double* wt = stencil.weight.data();

  for (const DpIndex& p : points) {
    const std::size_t at = cur.index(p);
    const double* base = u + at;
    const double ui = *base;
    double acc = 0.0;
    for (std::size_t o = 0; o < terms; ++o) {
      acc += wt[o] * (base[off[o]] - ui);
    }
    for (int r = 1; r < repeats; ++r) {
      double extra = 0.0;
      for (std::size_t o = 0; o < terms; ++o) {
        extra += wt[o] * (base[off[o]] - ui);
      }
      keep(extra);
    }
    // Finite sums cannot involve the sentinel; only re-scan on NaN/Inf.
    if (!std::isfinite(acc) || is_missing(ui)) {
      if (is_missing(ui)) {
        throw MissingValueError("DP " + describe(p) + " itself is undelivered");
      }
      bool any_missing = false;
      for (std::size_t o = 0; o < terms; ++o) {
        any_missing = any_missing || is_missing(base[off[o]]);
      }
      if (any_missing) {
        report_missing(cur, p, stencil);
      }
    }
    const double b = source ? source(t, p) : 0.0;
    out[at] = ui + dt * (b + params.c * acc);
  }
}

void step_sd(const Field& cur, Field& next, int sd, const SdGrid& grid, double t, double dt,
             const SourceFn& source, const Stencil& stencil, const ModelParams& params) {
  const FlatStencil flat = flatten(stencil, params, grid.spec().padded());
  const std::vector<DpIndex> points = grid.dps(sd);
  step_points(cur, next, points, t, dt, source, flat, params);
}

double stable_dt(const ModelParams& params, const Stencil& stencil) {
  double sum = 0.0;
  for (const Offset& o : stencil.offsets) {
    if (o.di == 0 && o.dj == 0) {
      continue;
    }
    const double rho = std::hypot(o.di, o.dj) / stencil.m;
    sum += influence(params.influence, rho) * stencil.volume;
  }
  const double s = params.c * sum;
  if (!(s > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / s;
}

double exact_solution(double t, double x1, double x2) {
  return std::cos(kTwoPi * t) * shape(x1, x2);
}

double manufactured_source(double t, DpIndex i, const DomainSpec& spec, const ModelParams& params,
                           SourceMode mode) {
  const double x1 = spec.coord(i.i);
  const double x2 = spec.coord(i.j);
  const double dwdt = -kTwoPi * std::sin(kTwoPi * t) * shape(x1, x2);
  if (params.m == 0 || params.c == 0.0) {
    return dwdt;
  }
  const double cos_t = std::cos(kTwoPi * t);
  double integral = 0.0;
  if (mode == SourceMode::discrete) {
    const Stencil stencil = build_stencil(params.m, spec.h(), false);
    const double centre = exact_solution(t, x1, x2);
    for (const Offset& o : stencil.offsets) {
      const double rho = std::hypot(o.di, o.dj) / params.m;
      const double wj = exact_solution(t, spec.coord(i.i + o.di), spec.coord(i.j + o.dj));
      integral += influence(params.influence, rho) * stencil.volume * (wj - centre);
    }
  } else {
    integral = cos_t * refined_integral(spec, params, x1, x2);
  }
  return dwdt - params.c * integral;
}

ManufacturedSource::ManufacturedSource(const DomainSpec& spec, const ModelParams& params,
                                       SourceMode mode)
    : spec_(spec), c_(params.c), mode_(mode) {
  const auto n = static_cast<std::size_t>(spec.n());
  shape_.resize(n * n);
  integral_.assign(n * n, 0.0);
  const Stencil stencil = build_stencil(params.m, spec.h(), false);
  for (int j = 0; j < spec.n(); ++j) {
    for (int i = 0; i < spec.n(); ++i) {
      const std::size_t at = static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i);
      shape_[at] = shape(spec.coord(i), spec.coord(j));
      if (params.m == 0 || params.c == 0.0) {
        continue;
      }
      integral_[at] = mode == SourceMode::discrete
                          ? lattice_integral(spec, params, stencil, {i, j})
                          : refined_integral(spec, params, spec.coord(i), spec.coord(j));
    }
  }
}

double ManufacturedSource::operator()(double t, DpIndex i) const {
  const std::size_t at = static_cast<std::size_t>(i.j) * static_cast<std::size_t>(spec_.n()) +
                         static_cast<std::size_t>(i.i);
  return -kTwoPi * std::sin(kTwoPi * t) * shape_[at] - c_ * std::cos(kTwoPi * t) * integral_[at];
}

SourceFn ManufacturedSource::as_function() const {
  // Each copy caches the time factors of the last t it saw; copies are
  // independent, so give every worker its own.
  return [this, last_t = std::numeric_limits<double>::quiet_NaN(), sin_t = 0.0,
          cos_t = 0.0](double t, DpIndex i) mutable {
    if (!(t == last_t)) {
      last_t = t;
      sin_t = std::sin(kTwoPi * t);
      cos_t = std::cos(kTwoPi * t);
    }
    const std::size_t at = static_cast<std::size_t>(i.j) * static_cast<std::size_t>(spec_.n()) +
                           static_cast<std::size_t>(i.i);
    return -kTwoPi * sin_t * shape_[at] - c_ * cos_t * integral_[at];
  };
}

Field manufactured_initial(const DomainSpec& spec) {
  Field f(spec);
  for (int j = 0; j < spec.n(); ++j) {
    for (int i = 0; i < spec.n(); ++i) {
      f(i, j) = exact_solution(0.0, spec.coord(i), spec.coord(j));
    }
  }
  return f;
}

double error_l2(const Field& field, double t) {
  const DomainSpec& spec = field.spec();
  double acc = 0.0;
  for (int j = 0; j < spec.n(); ++j) {
    for (int i = 0; i < spec.n(); ++i) {
      const double d = exact_solution(t, spec.coord(i), spec.coord(j)) - field(i, j);
      acc += d * d;
    }
  }
  return spec.h() * spec.h() * acc;
}

}  // namespace nlheat
