#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "npch/cylinder.hpp"
#include "npch/errors.hpp"

using namespace npch;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MobiusMap hyperbolic(double delta) {
  Eigen::Matrix2d m;
  m << std::exp(delta / 2), 0.0, 0.0, std::exp(-delta / 2);
  return MobiusMap(m);
}

EuclideanMotion identity_motion(int n) { return EuclideanMotion(Matrix::Identity(n, n), Vector::Zero(n)); }

template <class G>
CylinderSection<G> constant_section(const G& space, const isometry_t<G>& tw, const CylinderGrid& g,
                                    const typename G::point_type& p) {
  return CylinderSection<G>(g, space, tw, std::vector<typename G::point_type>((g.n_t + 1) * g.n_theta, p));
}

MetricTree star() { return MetricTree({"o", "a", "b", "c"}, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}}); }

}  // namespace

TEST(Grid, Validation) {
  EXPECT_THROW(CylinderGrid::with_density(0.0, 4, 16), DomainError);
  EXPECT_THROW(CylinderGrid::with_density(1.0, 4, 4), DomainError);
  const CylinderGrid g = CylinderGrid::with_density(10.0, 5, 64);
  EXPECT_EQ(g.n_t, 50);
  EXPECT_EQ(g.row_of(3.0), 15);
}

TEST(Energy, ConstantSectionIsZero) {
  const EuclideanSpace e(2);
  const auto s = constant_section(e, identity_motion(2), CylinderGrid::with_density(4.0, 4, 16), Vector::Ones(2));
  EXPECT_EQ(total_energy(s), 0.0);
  EXPECT_EQ(discrete_energy(s, 1.0, 3.0), 0.0);
}

TEST(Energy, EuclideanLinearInT) {
  // u(t, theta) = (t, 0): integral of |du/dt|^2 over [0,T] x S^1 equals 2 pi T.
  const EuclideanSpace e(2);
  const CylinderGrid g = CylinderGrid::with_density(3.0, 4, 16);
  std::vector<Vector> v;
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) v.push_back((Vector(2) << g.t(i), 0.0).finished());
  const CylinderSection<EuclideanSpace> s(g, e, identity_motion(2), v);
  EXPECT_NEAR(total_energy(s), kTwoPi * 3.0, 1e-12);
}

TEST(Energy, HelixSlope) {
  const MobiusMap tw = hyperbolic(1.0);
  const HyperbolicPlane h;
  const CylinderGrid g = CylinderGrid::with_density(8.0, 4, 32);
  const auto s = prototype_section(h, tw, helix_loop(h, tw), g);
  EXPECT_NEAR(total_energy(s), 8.0 / kTwoPi, 1e-9);
  const EnergyProfile p = energy_growth_profile(s, min_energy_constant(1.0));
  EXPECT_NEAR(p.slope_fit, 1.0 / kTwoPi, 1e-9);
  EXPECT_LT(p.bounded_defect, 1e-9);
  EXPECT_TRUE(lower_bound_check(p).ok);
  const ThetaEnergyReport th = theta_energy_function(s, p.e_rho);
  for (double f : th.F) EXPECT_NEAR(f, 0.0, 1e-9);
}

TEST(Energy, ProfileOfConstantHasZeroSlope) {
  const EuclideanSpace e(1);
  const auto s = constant_section(e, identity_motion(1), CylinderGrid::with_density(5.0, 4, 16), Vector::Zero(1));
  const EnergyProfile p = energy_growth_profile(s, 0.0);
  EXPECT_EQ(p.slope_fit, 0.0);
  EXPECT_EQ(p.annuli.size(), 5u);
}

TEST(Energy, WindowOutsideRangeRejected) {
  const EuclideanSpace e(1);
  const auto s = constant_section(e, identity_motion(1), CylinderGrid::with_density(2.0, 4, 16), Vector::Zero(1));
  EXPECT_THROW(discrete_energy(s, -1.0, 1.0), DomainError);
}

TEST(LowerBound, DetectsDeficit) {
  EnergyProfile p;
  p.e_rho = 1.0;
  p.h_theta = 0.1;
  p.annuli = {{0.0, 1.0, 1.0}, {1.0, 2.0, 0.5}};
  EXPECT_FALSE(lower_bound_check(p).ok);
  p.annuli[1].energy = 0.95;
  EXPECT_TRUE(lower_bound_check(p).ok);
}

TEST(Prototype, LoopMismatchRejected) {
  const MobiusMap tw = hyperbolic(1.0);
  const HyperbolicPlane h;
  const Loop<HyperbolicPlane> bad = [](double) { return std::complex<double>(0.2, 0.0); };
  EXPECT_THROW(prototype_section(h, tw, bad, CylinderGrid::with_density(2.0, 4, 16)), DomainError);
}

TEST(Prototype, EllipticConstantLoop) {
  Eigen::Matrix2d r;
  r << std::cos(0.5), std::sin(0.5), -std::sin(0.5), std::cos(0.5);
  const MobiusMap tw(r);
  const HyperbolicPlane h;
  const auto fixed = basepoint_curve(tw)(0.0);
  const Loop<HyperbolicPlane> loop = [fixed](double) { return fixed; };
  const auto s = prototype_section(h, tw, loop, CylinderGrid::with_density(3.0, 4, 16));
  for (const auto& v : s.values()) EXPECT_LT(std::abs(v - fixed), 1e-12);
}

TEST(Relax, EuclideanLinearInterpolant) {
  const EuclideanSpace e(2);
  const CylinderGrid g = CylinderGrid::with_density(2.0, 8, 16);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<Vector> v;
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      if (i == 0 || i == g.n_t) {
        v.push_back((Vector(2) << 1.0 + 2.0 * g.t(i), -g.t(i)).finished());
      } else {
        v.push_back((Vector(2) << n01(rng), n01(rng)).finished());
      }
    }
  RelaxOptions opt;
  opt.tol = 1e-13;
  const auto r = relax_dirichlet(CylinderSection<EuclideanSpace>(g, e, identity_motion(2), v), opt);
  double err = 0.0;
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const Vector& x = r.section.raw(i, j);
      err = std::max({err, std::abs(x[0] - (1.0 + 2.0 * g.t(i))), std::abs(x[1] + g.t(i))});
    }
  EXPECT_LT(err, 1e-10);
  for (std::size_t k = 1; k < r.energy_history.size(); ++k)
    EXPECT_LE(r.energy_history[k], r.energy_history[k - 1] + 1e-12);
}

TEST(Relax, HelixIsFixedPoint) {
  const MobiusMap tw = hyperbolic(1.0);
  const HyperbolicPlane h;
  const auto helix = prototype_section(h, tw, helix_loop(h, tw), CylinderGrid::with_density(4.0, 4, 32));
  RelaxOptions opt;
  opt.tol = 1e-12;
  const auto r = relax_dirichlet(helix, opt);
  EXPECT_LE(r.sweeps, 2);
  EXPECT_LE(sup_distance(r.section, helix), 1e-12);
}

TEST(Relax, OddThetaRejected) {
  const EuclideanSpace e(1);
  const CylinderGrid g{2.0, 8, 9};
  EXPECT_THROW(relax_dirichlet(constant_section(e, identity_motion(1), g, Vector::Zero(1))), DomainError);
}

TEST(Relax, TreeBandFollowsVertexPath) {
  // Boundary rows on two different legs; the harmonic section is constant in
  // theta and moves along the connecting path at constant speed.
  const MetricTree t = star();
  const TreeAutomorphism id(t, {0, 1, 2, 3});
  const CylinderGrid g = CylinderGrid::with_density(2.0, 5, 8);
  const TreePoint a = t.on_edge(0, 0.5), b = t.on_edge(1, 0.5);
  std::vector<TreePoint> v;
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) v.push_back(i == g.n_t ? b : a);
  RelaxOptions opt;
  opt.tol = 1e-13;
  const auto r = relax_dirichlet(CylinderSection<MetricTree>(g, t, id, v), opt);
  for (int i = 0; i <= g.n_t; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const TreePoint& x = r.section.raw(i, j);
      EXPECT_NEAR(t.distance(x, a), g.t(i) / g.T, 1e-9);
      EXPECT_NEAR(t.distance(x, a) + t.distance(x, b), 1.0, 1e-9);
    }
}

TEST(Solve, EllipticConstantBoundary) {
  Eigen::Matrix2d r;
  r << std::cos(0.5), std::sin(0.5), -std::sin(0.5), std::cos(0.5);
  const MobiusMap tw(r);
  const HyperbolicPlane h;
  const auto fixed = basepoint_curve(tw)(0.0);
  SolveParams p;
  p.T0 = 3.0;
  p.doublings = 1;
  p.n_theta = 16;
  p.rows_per_unit = 4;
  const auto res = solve_punctured_disk(h, tw, Loop<HyperbolicPlane>([fixed](double) { return fixed; }), p);
  EXPECT_NEAR(res.profile.total_energy, 0.0, 1e-20);
  for (const auto& v : res.section.values()) EXPECT_LT(std::abs(v - fixed), 1e-12);
}

TEST(Solve, HyperbolicSmallRun) {
  const MobiusMap tw = hyperbolic(1.0);
  SolveParams p;
  p.T0 = 4.0;
  p.doublings = 1;
  p.n_theta = 32;
  p.rows_per_unit = 4;
  p.cauchy_tol = 1e-2;
  const auto res = solve_punctured_disk(HyperbolicPlane{}, tw, perturbed_helix(tw, 0.1), p);
  EXPECT_EQ(res.level_profiles.size(), 2u);
  EXPECT_EQ(res.cauchy_distances.size(), 1u);
  for (const auto& prof : res.level_profiles) EXPECT_TRUE(lower_bound_check(prof).ok);
  const auto th = theta_energy_function(res.deepest, res.profile.e_rho);
  EXPECT_TRUE(th.nonincreasing);
  EXPECT_TRUE(sublog_growth_check(res.deepest).finite);
}

TEST(Sublog, ConstantSection) {
  const EuclideanSpace e(2);
  const auto s = constant_section(e, identity_motion(2), CylinderGrid::with_density(4.0, 4, 16), Vector::Ones(2));
  const SublogReport r = sublog_growth_check(s);
  for (double c : r.c_eps) EXPECT_LE(c, 0.0);
}

TEST(Uniqueness, IdenticalSeedsAndEuclidean) {
  SolveParams p;
  p.T0 = 2.0;
  p.doublings = 1;
  p.n_theta = 16;
  p.rows_per_unit = 4;
  p.relax.tol = 1e-12;
  p.cauchy_tol = std::numeric_limits<double>::infinity();
  const MobiusMap tw = hyperbolic(1.0);
  const auto same = uniqueness_probe(HyperbolicPlane{}, tw, perturbed_helix(tw, 0.1),
                                     {SeedKind::prototype, SeedKind::prototype}, p, 9);
  EXPECT_EQ(same.sup_distance, 0.0);

  const EuclideanSpace e(2);
  const EuclideanMotion shift(Matrix::Identity(2, 2), (Vector(2) << 1.0, 0.0).finished());
  const auto eu = uniqueness_probe(e, shift, helix_loop(e, shift), {SeedKind::prototype, SeedKind::random}, p, 9);
  EXPECT_LE(eu.sup_distance, 1e-10);
  EXPECT_THROW(uniqueness_probe(e, shift, helix_loop(e, shift), {SeedKind::random}, p, 9), DomainError);
}

TEST(SingularSet, Examples) {
  const MetricTree t = star();
  const TreeAutomorphism id(t, {0, 1, 2, 3});
  const CylinderGrid g = CylinderGrid::with_density(2.0, 4, 32);
  EXPECT_EQ(singular_set_flags(constant_section(t, id, g, t.vertex_point(0))).fraction, 1.0);
  EXPECT_TRUE(singular_set_flags(constant_section(t, id, g, t.on_edge(1, 0.5))).nodes.empty());
  const EuclideanSpace e(1);
  EXPECT_THROW(singular_set_flags(constant_section(e, identity_motion(1), g, Vector::Zero(1))), UnsupportedSpace);
}

TEST(SingularSet, FoldedArcsRefine) {
  // Rows split between two legs pass the centre vertex on one row band only,
  // so the flagged fraction shrinks with the mesh.
  const MetricTree t = star();
  const TreeAutomorphism id(t, {0, 1, 2, 3});
  double prev = 1.0;
  for (int rpu : {4, 8, 16}) {
    const CylinderGrid g = CylinderGrid::with_density(2.0, rpu, 4 * rpu);
    std::vector<TreePoint> v;
    for (int i = 0; i <= g.n_t; ++i)
      for (int j = 0; j < g.n_theta; ++j) {
        const double s = g.t(i) - 1.0;
        v.push_back(s < 0 ? t.on_edge(0, -s) : t.on_edge(1, s));
      }
    const double f = singular_set_flags(CylinderSection<MetricTree>(g, t, id, v)).fraction;
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, prev);
    prev = f;
  }
}
