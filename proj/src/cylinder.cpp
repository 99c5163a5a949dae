#include "npch/cylinder.hpp"

#include <algorithm>
#include <cmath>

namespace npch {

CylinderGrid::CylinderGrid(double T_, int n_t_, int n_theta_) : T(T_), n_t(n_t_), n_theta(n_theta_) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("cylinder length must be positive");
  if (n_t < 1) throw DomainError("cylinder needs at least one t-interval");
  if (n_theta < 8) throw DomainError("cylinder needs n_theta >= 8");
  const double aspect = h_t() / h_theta();
  if (aspect < 0.25 - 1e-12 || aspect > 4.0 + 1e-12) throw DomainError("grid aspect h_t/h_theta outside [0.25, 4]");
}

CylinderGrid CylinderGrid::with_density(double T, int rows_per_unit, int n_theta) {
  if (rows_per_unit < 1) throw DomainError("rows_per_unit must be positive");
  const int n_t = std::max(1, static_cast<int>(std::lround(T * rows_per_unit)));
  return CylinderGrid(T, n_t, n_theta);
}

int CylinderGrid::row_of(double t) const {
  return static_cast<int>(std::clamp(std::lround(t / h_t()), 0L, static_cast<long>(n_t)));
}

double window_energy_from_rows(const RowEnergies& r, const CylinderGrid& g, int i1, int i2) {
  if (i2 <= i1) return 0.0;
  const double wt = g.h_theta() / g.h_t();
  const double wth = g.h_t() / g.h_theta();
  double e = 0.0;
  for (int i = i1; i < i2; ++i) e += wt * r.gap[static_cast<std::size_t>(i)];
  for (int i = i1; i <= i2; ++i) {
    const double c = (i == i1 || i == i2) ? 0.5 : 1.0;
    e += c * wth * r.theta[static_cast<std::size_t>(i)];
  }
  return e;
}

EnergyProfile profile_from_rows(const RowEnergies& r, const CylinderGrid& g, double e_rho, double window) {
  if (!(window > 0.0)) throw DomainError("profile window must be positive");
  EnergyProfile p;
  p.e_rho = e_rho;
  p.h_theta = g.h_theta();
  const int k_max = static_cast<int>(std::floor(g.T / window + 1e-9));
  std::vector<double> ts{0.0};
  std::vector<double> cum{0.0};
  p.min_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_max; ++k) {
    const int i1 = g.row_of(k * window);
    const int i2 = g.row_of((k + 1) * window);
    const double t1 = g.t(i1), t2 = g.t(i2);
    const double e = window_energy_from_rows(r, g, i1, i2);
    p.annuli.push_back({t1, t2, e});
    const double slack = e - e_rho * (t2 - t1);
    p.bounded_defect = std::max(p.bounded_defect, std::abs(slack));
    p.min_slack = std::min(p.min_slack, slack);
    ts.push_back(t2);
    cum.push_back(cum.back() + e);
  }
  if (p.annuli.empty()) p.min_slack = 0.0;
  if (ts.size() >= 2) {
    const double n = static_cast<double>(ts.size());
    double st = 0, se = 0, stt = 0, ste = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      st += ts[k];
      se += cum[k];
      stt += ts[k] * ts[k];
      ste += ts[k] * cum[k];
    }
    p.slope_fit = (n * ste - st * se) / (n * stt - st * st);
    p.intercept = (se - p.slope_fit * st) / n;
  }
  p.total_energy = window_energy_from_rows(r, g, 0, g.n_t);
  p.modified_energy = p.total_energy - e_rho * g.T;
  return p;
}

LowerBoundCheck lower_bound_check(const EnergyProfile& p) {
  LowerBoundCheck c;
  c.worst_margin = std::numeric_limits<double>::infinity();
  const double allowance = 10.0 * p.h_theta * p.h_theta;
  for (const Annulus& a : p.annuli)
    c.worst_margin = std::min(c.worst_margin, a.energy - (p.e_rho - allowance) * (a.t2 - a.t1));
  if (p.annuli.empty()) c.worst_margin = 0.0;
  c.ok = c.worst_margin >= 0.0;
  return c;
}

double prototype_schedule(double t) {
  const double l2 = std::log(2.0);
  return t <= l2 ? 0.0 : std::cbrt(t - l2);
}

Loop<HyperbolicPlane> perturbed_helix(const MobiusMap& twist, double eps) {
  const DiskDecayRay ray = disk_decay_ray(twist);
  if (ray.classification != IsometryClass::hyperbolic) throw DomainError("perturbed helix needs a hyperbolic twist");
  const Eigen::Matrix2d f = ray.frame;
  const double log_k = std::log(ray.generator(0, 0) / ray.generator(1, 1));
  return [f, log_k, eps](double theta) {
    const double delta = eps * std::sin(theta);
    const std::complex<double> z =
        std::exp(theta / (2.0 * std::numbers::pi) * log_k) * std::complex<double>(std::tanh(delta), 1.0 / std::cosh(delta));
    return half_plane_to_disk((f(0, 0) * z + f(0, 1)) / (f(1, 0) * z + f(1, 1)));
  };
}

double sor_parameter(const CylinderGrid& g) {
  const double wt = g.h_theta() / g.h_t();
  const double wth = g.h_t() / g.h_theta();
  const double rho = (wt * std::cos(std::numbers::pi / g.n_t) + wth) / (wt + wth);
  return 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));
}

ThetaEnergyReport theta_energy_from_rows(const std::vector<double>& theta_sums, const CylinderGrid& g, double e_rho,
                                         double lipschitz, double tail_start) {
  ThetaEnergyReport r;
  r.lipschitz = lipschitz;
  r.tail_start = tail_start;
  const double h = std::max(g.h_t(), g.h_theta());
  r.delta_F = 3.0 * h * h * lipschitz * lipschitz;
  for (int i = 0; i <= g.n_t; ++i) {
    r.t.push_back(g.t(i));
    r.F.push_back(theta_sums[static_cast<std::size_t>(i)] / g.h_theta() - e_rho);
  }
  r.min_F = *std::min_element(r.F.begin(), r.F.end());
  const int s = g.row_of(tail_start);
  r.max_increase = -std::numeric_limits<double>::infinity();
  for (int i = s; i < g.n_t; ++i)
    r.max_increase = std::max(r.max_increase, r.F[static_cast<std::size_t>(i + 1)] - r.F[static_cast<std::size_t>(i)]);
  if (s >= g.n_t) r.max_increase = 0.0;
  r.nonincreasing = r.max_increase <= r.delta_F;
  const double base = g.t(s) * r.F[static_cast<std::size_t>(s)];
  const double last = g.T * r.F.back();
  r.tF_ratio = base > 0.0 ? last / base : (std::abs(last) <= 1e-14 ? 0.0 : std::numeric_limits<double>::infinity());
  return r;
}

std::string to_string(SeedKind k) {
  switch (k) {
    case SeedKind::prototype: return "prototype";
    case SeedKind::random: return "random";
    case SeedKind::constant_bridge: return "constant_bridge";
  }
  return "unknown";
}

SingularSetReport singular_set_flags(const CylinderSection<MetricTree>& s) {
  const MetricTree& tree = s.space();
  const CylinderGrid& g = s.grid();
  const double h = std::max(g.h_t(), g.h_theta());
  std::vector<int> branch;
  for (int v = 0; v < tree.vertex_count(); ++v)
    if (tree.degree(v) >= 3) branch.push_back(v);
  SingularSetReport rep;
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j)
      for (int v : branch)
        if (tree.to_vertex(s.raw(i, j), v) <= h) {
          rep.nodes.emplace_back(i, j);
          break;
        }
  rep.fraction = static_cast<double>(rep.nodes.size()) / static_cast<double>((g.n_t + 1) * g.n_theta);
  return rep;
}

}  // namespace npch
