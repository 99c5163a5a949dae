#pragma once

// Discrete equivariant sections on the half-cylinder [0,T] x S^1 and the
// harmonic-map machinery on top of them.
//
// Grid: rows t_i = i*h_t (i = 0..n_t), columns theta_j = j*h_theta
// (j = 0..n_theta-1). Only one fundamental domain is stored; column n_theta is
// twist(column 0) and column -1 is twist^-1(column n_theta-1).
//
// Energy of a window of rows [i1, i2]:
//   sum_{t-edges} d^2 * (h_theta/h_t)  +  sum_rows c_i sum_{theta-edges} d^2 * (h_t/h_theta)
// with c_i = 1/2 on the two end rows. A helix of translation length D costs
// exactly D^2/(2 pi) per unit of t.

#include <algorithm>
#include <any>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "npch/errors.hpp"
#include "npch/isometry.hpp"
#include "npch/parallel.hpp"
#include "npch/spaces.hpp"

namespace npch {

struct CylinderGrid {
  double T = 1.0;
  int n_t = 1;
  int n_theta = 8;

  CylinderGrid() = default;
  CylinderGrid(double T_, int n_t_, int n_theta_);
  // Grid with rows_per_unit rows per unit of t (T * rows_per_unit rounded).
  static CylinderGrid with_density(double T, int rows_per_unit, int n_theta);

  double h_t() const { return T / n_t; }
  double h_theta() const { return 2.0 * std::numbers::pi / n_theta; }
  double t(int i) const { return i * h_t(); }
  double theta(int j) const { return j * h_theta(); }
  int row_of(double t) const;
};

template <Geometry G>
class CylinderSection {
 public:
  using point_type = typename G::point_type;
  using iso_type = isometry_t<G>;

  CylinderSection(CylinderGrid grid, G space, iso_type twist, std::vector<point_type> values)
      : grid_(grid), space_(std::move(space)), twist_(twist), twist_inv_(twist.inverse()), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>((grid_.n_t + 1) * grid_.n_theta))
      throw DomainError("section storage does not match its grid");
  }

  const CylinderGrid& grid() const { return grid_; }
  const G& space() const { return space_; }
  const iso_type& twist() const { return twist_; }
  const iso_type& twist_inverse() const { return twist_inv_; }
  const std::vector<point_type>& values() const { return values_; }

  const point_type& raw(int i, int j) const { return values_[index(i, j)]; }
  point_type& raw(int i, int j) { return values_[index(i, j)]; }

  // Column index may run from -1 to n_theta; the seam applies the twist.
  point_type at(int i, int j) const {
    const int n = grid_.n_theta;
    if (j == n) return twist_.apply(raw(i, 0));
    if (j == -1) return twist_inv_.apply(raw(i, n - 1));
    return raw(i, j);
  }

  // Section on [0, t(rows - 1)].
  CylinderSection restrict_rows(int rows) const {
    if (rows < 2 || rows > grid_.n_t + 1) throw DomainError("restriction outside the grid");
    CylinderGrid g(grid_.t(rows - 1), rows - 1, grid_.n_theta);
    std::vector<point_type> v(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(rows * grid_.n_theta));
    return CylinderSection(g, space_, twist_, std::move(v));
  }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i * grid_.n_theta + j); }

  CylinderGrid grid_;
  G space_;
  iso_type twist_;
  iso_type twist_inv_;
  std::vector<point_type> values_;
};

template <Geometry G>
using Loop = std::function<typename G::point_type(double)>;

// ---------------------------------------------------------------------------
// Energies

template <Geometry G>
double row_theta_sum(const CylinderSection<G>& s, int i) {
  double e = 0.0;
  const int n = s.grid().n_theta;
  for (int j = 0; j < n; ++j) {
    const double d = s.space().distance(s.raw(i, j), s.at(i, j + 1));
    e += d * d;
  }
  return e;
}

template <Geometry G>
double row_gap_sum(const CylinderSection<G>& s, int i) {
  double e = 0.0;
  for (int j = 0; j < s.grid().n_theta; ++j) {
    const double d = s.space().distance(s.raw(i, j), s.raw(i + 1, j));
    e += d * d;
  }
  return e;
}

struct RowEnergies {
  std::vector<double> theta;  // per row, sum of squared theta-edge lengths
  std::vector<double> gap;    // per row gap i -> i+1, sum of squared t-edge lengths
};

template <Geometry G>
RowEnergies row_energies(const CylinderSection<G>& s) {
  const int nt = s.grid().n_t;
  RowEnergies r{std::vector<double>(static_cast<std::size_t>(nt + 1)), std::vector<double>(static_cast<std::size_t>(nt))};
  parallel_for(static_cast<std::size_t>(nt + 1), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      r.theta[i] = row_theta_sum(s, static_cast<int>(i));
      if (static_cast<int>(i) < nt) r.gap[i] = row_gap_sum(s, static_cast<int>(i));
    }
  });
  return r;
}

double window_energy_from_rows(const RowEnergies& r, const CylinderGrid& g, int i1, int i2);

template <Geometry G>
double discrete_energy(const CylinderSection<G>& s, double t1, double t2) {
  const CylinderGrid& g = s.grid();
  const double slack = 1e-9 * (1.0 + g.T);
  if (t1 < -slack || t2 > g.T + slack) throw DomainError("energy window outside [0,T]");
  const int i1 = g.row_of(t1);
  const int i2 = g.row_of(t2);
  if (i2 <= i1) return 0.0;
  RowEnergies r;
  r.theta.assign(static_cast<std::size_t>(g.n_t + 1), 0.0);
  r.gap.assign(static_cast<std::size_t>(g.n_t), 0.0);
  for (int i = i1; i <= i2; ++i) {
    r.theta[static_cast<std::size_t>(i)] = row_theta_sum(s, i);
    if (i < i2) r.gap[static_cast<std::size_t>(i)] = row_gap_sum(s, i);
  }
  return window_energy_from_rows(r, g, i1, i2);
}

template <Geometry G>
double total_energy(const CylinderSection<G>& s) {
  return window_energy_from_rows(row_energies(s), s.grid(), 0, s.grid().n_t);
}

struct Annulus {
  double t1;
  double t2;
  double energy;
};

struct EnergyProfile {
  std::vector<Annulus> annuli;
  double slope_fit = 0.0;
  double intercept = 0.0;
  double e_rho = 0.0;
  double bounded_defect = 0.0;   // sup |energy - e_rho * length|
  double min_slack = 0.0;        // min (energy - e_rho * length)
  double total_energy = 0.0;
  double modified_energy = 0.0;  // total - e_rho * T
  double h_theta = 0.0;
};

EnergyProfile profile_from_rows(const RowEnergies& r, const CylinderGrid& g, double e_rho, double window = 1.0);

template <Geometry G>
EnergyProfile energy_growth_profile(const CylinderSection<G>& s, double e_rho, double window = 1.0) {
  return profile_from_rows(row_energies(s), s.grid(), e_rho, window);
}

// Lower-bound law: every window energy >= e_rho*len - 10*h_theta^2*len.
struct LowerBoundCheck {
  double worst_margin = 0.0;  // min over windows of energy - (e_rho - 10 h^2) * len
  bool ok = true;
};
LowerBoundCheck lower_bound_check(const EnergyProfile& p);

// ---------------------------------------------------------------------------
// Prototype sections

// s(t) = (t - log 2)^{1/3} for t >= log 2.
double prototype_schedule(double t);

template <Geometry G>
void check_loop_closes(const G& space, const isometry_t<G>& twist, const Loop<G>& loop) {
  const auto a = loop(2.0 * std::numbers::pi);
  const auto b = twist.apply(loop(0.0));
  if (space.distance(a, b) > 1e-8) throw DomainError("boundary loop does not close up to the twist");
}

template <Geometry G>
CylinderSection<G> prototype_section(const G& space, const isometry_t<G>& twist, const Loop<G>& loop,
                                     const CylinderGrid& grid) {
  check_loop_closes(space, twist, loop);
  const auto curve = basepoint_curve(twist);
  const double l2 = std::log(2.0);
  std::vector<typename G::point_type> v;
  v.reserve(static_cast<std::size_t>((grid.n_t + 1) * grid.n_theta));
  for (int i = 0; i <= grid.n_t; ++i) {
    const double t = grid.t(i);
    const auto c = curve(prototype_schedule(std::max(t, l2)));
    const auto ic = twist.apply(c);
    for (int j = 0; j < grid.n_theta; ++j) {
      const double frac = grid.theta(j) / (2.0 * std::numbers::pi);
      auto gamma = space.interp(c, ic, frac);
      if (t < l2) gamma = space.interp(loop(grid.theta(j)), gamma, t / l2);
      v.push_back(std::move(gamma));
    }
  }
  return CylinderSection<G>(grid, space, twist, std::move(v));
}

// The loop theta -> interp(c, I c, theta/2pi) through the basepoint.
template <Geometry G>
Loop<G> helix_loop(const G& space, const isometry_t<G>& twist) {
  const auto c = basepoint_curve(twist)(0.0);
  const auto ic = twist.apply(c);
  return [space, c, ic](double theta) {
    const double f = theta / (2.0 * std::numbers::pi);
    if (f <= 0.0) return c;
    if (f >= 1.0) return ic;
    return space.interp(c, ic, f);
  };
}

// Helix in the disk pushed off its geodesic by the normal offset eps*sin(theta).
Loop<HyperbolicPlane> perturbed_helix(const MobiusMap& twist, double eps);

// ---------------------------------------------------------------------------
// Relaxation

struct RelaxOptions {
  double tol = 1e-9;       // max node movement per sweep
  int max_sweeps = 200000;
  bool over_relax = true;  // SOR with per-node fallback; ignored for trees
  double omega = 0.0;      // 0 = from the grid spectrum
  double energy_slack = 1e-12;
};

template <Geometry G>
struct RelaxResult {
  CylinderSection<G> section;
  int sweeps = 0;
  double last_movement = 0.0;
  std::vector<double> energy_history;
};

double sor_parameter(const CylinderGrid& g);

namespace detail {

template <Geometry G>
double local_energy(const CylinderSection<G>& s, const std::array<typename G::point_type, 4>& nb, double wt,
                    double wth, const typename G::point_type& x) {
  double e = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double d = s.space().distance(x, nb[static_cast<std::size_t>(k)]);
    e += (k < 2 ? wt : wth) * d * d;
  }
  return e;
}

}  // namespace detail

template <Geometry G>
RelaxResult<G> relax_dirichlet(CylinderSection<G> init, const RelaxOptions& opt = {}) {
  const CylinderGrid g = init.grid();
  if (g.n_theta % 2 != 0) throw DomainError("red-black ordering needs an even n_theta");
  constexpr bool is_tree = std::is_same_v<G, MetricTree>;
  const double wt = g.h_theta() / g.h_t();
  const double wth = g.h_t() / g.h_theta();
  const double sum = 2.0 * wt + 2.0 * wth;
  const std::array<double, 4> w{wt / sum, wt / sum, wth / sum, wth / sum};
  const double omega = (is_tree || !opt.over_relax) ? 1.0 : (opt.omega > 0.0 ? opt.omega : sor_parameter(g));

  RelaxResult<G> res{std::move(init), 0, 0.0, {}};
  CylinderSection<G>& s = res.section;
  double energy = total_energy(s);
  res.energy_history.push_back(energy);
  if (g.n_t < 2) return res;

  std::vector<double> row_move(static_cast<std::size_t>(g.n_t + 1), 0.0);
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    std::fill(row_move.begin(), row_move.end(), 0.0);
    for (int color = 0; color < 2; ++color) {
      parallel_for(static_cast<std::size_t>(g.n_t - 1), [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
          const int i = static_cast<int>(r) + 1;
          for (int j = (i + color) % 2; j < g.n_theta; j += 2) {
            const std::array<typename G::point_type, 4> nb{s.raw(i - 1, j), s.raw(i + 1, j), s.at(i, j - 1),
                                                           s.at(i, j + 1)};
            const typename G::point_type old = s.raw(i, j);
            typename G::point_type next = s.space().barycenter(nb, w, 1e-13, &old);
            if (omega != 1.0) {
              typename G::point_type over = s.space().extrapolate(old, next, omega);
              if (detail::local_energy(s, nb, wt, wth, over) <= detail::local_energy(s, nb, wt, wth, old))
                next = std::move(over);
            }
            const double mv = s.space().distance(old, next);
            row_move[static_cast<std::size_t>(i)] = std::max(row_move[static_cast<std::size_t>(i)], mv);
            s.raw(i, j) = std::move(next);
          }
        }
      });
    }
    const double next_energy = total_energy(s);
    res.energy_history.push_back(next_energy);
    if (next_energy > energy + opt.energy_slack * (1.0 + energy))
      throw ConvergenceError("relaxation increased the energy", res.energy_history, std::any(s));
    energy = next_energy;
    res.sweeps = sweep;
    res.last_movement = *std::max_element(row_move.begin(), row_move.end());
    if (res.last_movement < opt.tol) return res;
  }
  throw ConvergenceError("relaxation did not converge", res.energy_history, std::any(s));
}

// ---------------------------------------------------------------------------
// Exhaustion

struct SolveParams {
  double T0 = 10.0;
  int doublings = 2;
  int rows_per_unit = 5;
  int n_theta = 64;
  double cauchy_tol = 1e-6;
  RelaxOptions relax;
};

template <Geometry G>
struct SolveResult {
  CylinderSection<G> section;  // deepest solve restricted to [0, T0]
  CylinderSection<G> deepest;
  EnergyProfile profile;       // of the deepest solve
  std::vector<double> cauchy_distances;
  std::vector<int> sweeps;
  std::vector<EnergyProfile> level_profiles;
};

template <Geometry G>
double sup_distance(const CylinderSection<G>& a, const CylinderSection<G>& b) {
  if (a.values().size() != b.values().size()) throw DomainError("sections live on different grids");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k)
    m = std::max(m, a.space().distance(a.values()[k], b.values()[k]));
  return m;
}

template <Geometry G>
SolveResult<G> solve_punctured_disk(const G& space, const isometry_t<G>& twist, const Loop<G>& loop,
                                    const SolveParams& p, std::optional<CylinderSection<G>> first_init = {}) {
  if (p.doublings < 0) throw DomainError("doublings must be nonnegative");
  const double e_rho = min_energy_constant(translation_length(IsometryDescriptor(twist)));
  const CylinderGrid g0 = CylinderGrid::with_density(p.T0, p.rows_per_unit, p.n_theta);
  std::optional<CylinderSection<G>> prev;
  std::optional<CylinderSection<G>> prev_restricted;
  SolveResult<G> out{prototype_section(space, twist, loop, g0), prototype_section(space, twist, loop, g0), {}, {}, {}, {}};
  for (int level = 0; level <= p.doublings; ++level) {
    const CylinderGrid g(g0.T * (1 << level), g0.n_t * (1 << level), g0.n_theta);
    CylinderSection<G> init = prototype_section(space, twist, loop, g);
    if (prev) {
      for (int i = 0; i <= prev->grid().n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) init.raw(i, j) = prev->raw(i, j);
      // Keep the far boundary of this level on the prototype.
    } else if (first_init) {
      if (first_init->grid().n_t != g.n_t || first_init->grid().n_theta != g.n_theta)
        throw DomainError("initial section does not match the first exhaustion level");
      for (int i = 1; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) init.raw(i, j) = first_init->raw(i, j);
    }
    RelaxResult<G> r = relax_dirichlet(std::move(init), p.relax);
    out.sweeps.push_back(r.sweeps);
    out.level_profiles.push_back(energy_growth_profile(r.section, e_rho));
    CylinderSection<G> restricted = r.section.restrict_rows(g0.n_t + 1);
    if (prev_restricted) out.cauchy_distances.push_back(sup_distance(*prev_restricted, restricted));
    prev_restricted = restricted;
    prev = std::move(r.section);
  }
  if (!out.cauchy_distances.empty() && out.cauchy_distances.back() >= p.cauchy_tol)
    throw ConvergenceError("restrictions to [0,T0] are not Cauchy", out.cauchy_distances, std::any(*prev));
  out.section = *prev_restricted;
  out.profile = out.level_profiles.back();
  out.deepest = std::move(*prev);
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct ThetaEnergyReport {
  std::vector<double> t;
  std::vector<double> F;
  double delta_F = 0.0;
  double lipschitz = 0.0;
  double tail_start = 2.0;
  double max_increase = 0.0;  // max over tail of F(t_{i+1}) - F(t_i)
  bool nonincreasing = true;
  double min_F = 0.0;
  double tF_ratio = 0.0;      // t F(t) at the last row over its value at tail_start
};

// Largest theta- and t-difference quotient over the grid.
template <Geometry G>
double lipschitz_estimate(const CylinderSection<G>& s) {
  const CylinderGrid& g = s.grid();
  double l = 0.0;
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      l = std::max(l, s.space().distance(s.raw(i, j), s.at(i, j + 1)) / g.h_theta());
      if (i < g.n_t) l = std::max(l, s.space().distance(s.raw(i, j), s.raw(i + 1, j)) / g.h_t());
    }
  return l;
}

ThetaEnergyReport theta_energy_from_rows(const std::vector<double>& theta_sums, const CylinderGrid& g, double e_rho,
                                         double lipschitz, double tail_start);

template <Geometry G>
ThetaEnergyReport theta_energy_function(const CylinderSection<G>& s, double e_rho, double tail_start = 2.0) {
  return theta_energy_from_rows(row_energies(s).theta, s.grid(), e_rho, lipschitz_estimate(s), tail_start);
}

struct SublogReport {
  std::vector<double> eps{1.0, 0.1, 0.01};
  std::vector<double> c_eps;  // max over rows of max_theta d^2(u, ref) - eps t
  double ratio_at_end = 0.0;  // max_theta d^2(u(T), ref) / T
  double radial_constant = 0.0;  // max over t >= 1 of t |du/dt|^2
  bool finite = true;
};

template <Geometry G>
SublogReport sublog_growth_check(const CylinderSection<G>& s, std::optional<typename G::point_type> ref = {}) {
  const CylinderGrid& g = s.grid();
  const auto r = ref ? *ref : s.raw(0, 0);
  SublogReport rep;
  std::vector<double> row_max(static_cast<std::size_t>(g.n_t + 1), 0.0);
  std::vector<double> row_dt(static_cast<std::size_t>(g.n_t + 1), 0.0);
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const double d = s.space().distance(s.raw(i, j), r);
      row_max[static_cast<std::size_t>(i)] = std::max(row_max[static_cast<std::size_t>(i)], d * d);
      if (i > 0 && i < g.n_t) {
        const double q = s.space().distance(s.raw(i - 1, j), s.raw(i + 1, j)) / (2.0 * g.h_t());
        row_dt[static_cast<std::size_t>(i)] = std::max(row_dt[static_cast<std::size_t>(i)], q * q);
      }
    }
  for (double e : rep.eps) {
    double c = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= g.n_t; ++i) c = std::max(c, row_max[static_cast<std::size_t>(i)] - e * g.t(i));
    rep.c_eps.push_back(c);
    rep.finite = rep.finite && std::isfinite(c);
  }
  rep.ratio_at_end = row_max.back() / g.T;
  for (int i = 1; i < g.n_t; ++i)
    if (g.t(i) >= 1.0) rep.radial_constant = std::max(rep.radial_constant, g.t(i) * row_dt[static_cast<std::size_t>(i)]);
  rep.finite = rep.finite && std::isfinite(rep.radial_constant);
  return rep;
}

struct UniquenessReport {
  double sup_distance = 0.0;
  double subharmonic_defect = 0.0;  // min interior discrete Laplacian of d^2(u_i, u_j)
  double subharmonic_bound = 0.0;   // -3 h^2 L^2
  bool converged = true;
  std::vector<std::string> seeds;
};

enum class SeedKind { prototype, random, constant_bridge };
std::string to_string(SeedKind k);

template <Geometry G>
CylinderSection<G> seed_section(SeedKind kind, const G& space, const isometry_t<G>& twist, const Loop<G>& loop,
                                const CylinderGrid& grid, std::uint64_t seed) {
  CylinderSection<G> s = prototype_section(space, twist, loop, grid);
  if (kind == SeedKind::prototype) return s;
  if (kind == SeedKind::random) {
    for (int i = 1; i < grid.n_t; ++i)
      for (int j = 0; j < grid.n_theta; ++j) {
        auto rng = task_rng(seed, static_cast<std::uint64_t>(i * grid.n_theta + j));
        const auto target = space.sample(rng, 1.0);
        s.raw(i, j) = space.interp(s.raw(i, j), target, 0.05);
      }
    return s;
  }
  const auto p = basepoint_curve(twist)(0.0);
  const double l2 = std::log(2.0);
  for (int i = 1; i < grid.n_t; ++i)
    for (int j = 0; j < grid.n_theta; ++j) {
      const double t = grid.t(i);
      s.raw(i, j) = t < l2 ? space.interp(loop(grid.theta(j)), p, t / l2) : p;
    }
  return s;
}

template <Geometry G>
double pair_subharmonic_defect(const CylinderSection<G>& a, const CylinderSection<G>& b) {
  const CylinderGrid& g = a.grid();
  auto f = [&](int i, int j) {
    const double d = a.space().distance(a.at(i, j), b.at(i, j));
    return d * d;
  };
  double m = std::numeric_limits<double>::infinity();
  for (int i = 1; i < g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const double c = f(i, j);
      const double lap = (f(i - 1, j) + f(i + 1, j) - 2.0 * c) / (g.h_t() * g.h_t()) +
                         (f(i, j - 1) + f(i, j + 1) - 2.0 * c) / (g.h_theta() * g.h_theta());
      m = std::min(m, lap);
    }
  return m;
}

template <Geometry G>
UniquenessReport uniqueness_probe(const G& space, const isometry_t<G>& twist, const Loop<G>& loop,
                                  const std::vector<SeedKind>& seeds, const SolveParams& p, std::uint64_t seed,
                                  std::vector<SolveResult<G>>* runs = nullptr) {
  if (seeds.size() < 2) throw DomainError("uniqueness probe needs at least two seeds");
  const CylinderGrid g0 = CylinderGrid::with_density(p.T0, p.rows_per_unit, p.n_theta);
  std::vector<SolveResult<G>> solved;
  UniquenessReport rep;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    rep.seeds.push_back(to_string(seeds[k]));
    solved.push_back(solve_punctured_disk(space, twist, loop, p,
                                          std::optional<CylinderSection<G>>(seed_section(
                                              seeds[k], space, twist, loop, g0, task_seed(seed, k)))));
  }
  double lip = 0.0;
  for (const auto& r : solved) lip = std::max(lip, lipschitz_estimate(r.section));
  const double h = std::max(g0.h_t(), g0.h_theta());
  rep.subharmonic_bound = -3.0 * h * h * lip * lip;
  rep.subharmonic_defect = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < solved.size(); ++a)
    for (std::size_t b = a + 1; b < solved.size(); ++b) {
      rep.sup_distance = std::max(rep.sup_distance, sup_distance(solved[a].section, solved[b].section));
      rep.subharmonic_defect =
          std::min(rep.subharmonic_defect, pair_subharmonic_defect(solved[a].section, solved[b].section));
    }
  if (runs) *runs = std::move(solved);
  return rep;
}

struct SingularSetReport {
  std::vector<std::pair<int, int>> nodes;
  double fraction = 0.0;
};

SingularSetReport singular_set_flags(const CylinderSection<MetricTree>& s);

template <Geometry G>
SingularSetReport singular_set_flags(const CylinderSection<G>&) {
  throw UnsupportedSpace("singular set flags need a tree target");
}

}  // namespace npch
