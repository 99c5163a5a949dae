#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "npch/bochner.hpp"
#include "npch/errors.hpp"

using namespace npch;
using cd = std::complex<double>;

namespace {

Polynomial scalar(std::vector<std::pair<std::array<int, 4>, cd>> terms) {
  std::vector<Monomial> m;
  for (auto& [p, c] : terms) {
    Eigen::VectorXcd v(1);
    v << c;
    m.push_back({p, v});
  }
  return Polynomial(std::move(m));
}

constexpr unsigned kDz1 = 1u, kDzb1 = 2u, kDz2 = 4u, kDzb2 = 8u;

ProbeOptions small_probe() {
  ProbeOptions o;
  o.mesh = 16;
  o.max_per_axis = 6;
  return o;
}

}  // namespace

TEST(ExteriorAlgebra, WedgeBasics) {
  const Form a = basis_form(0), b = basis_form(1);
  const Form ab = wedge(a, b), ba = wedge(b, a);
  EXPECT_EQ(ab[kDz1 | kDzb1], cd(1.0));
  EXPECT_EQ(ba[kDz1 | kDzb1], cd(-1.0));
  EXPECT_EQ(wedge(a, a).norm(), 0.0);
  EXPECT_EQ(wedge_sign(kDz2, kDz1), -1);
}

TEST(ExteriorAlgebra, KaehlerSquareDensity) {
  // omega = (i/2) sum dz ^ dzbar, and omega^2 / 2 is the Euclidean volume.
  const Form w = cd(0.0, 0.5) * (wedge(basis_form(0), basis_form(1)) + wedge(basis_form(2), basis_form(3)));
  EXPECT_NEAR(std::abs(volume_density(wedge(w, w) / 2.0) - 1.0), 0.0, 1e-15);
}

TEST(FdForms, LinearMaps) {
  const Point4 p{0.3, -0.2, 0.1, 0.4};
  const DiscreteForms z1 = fd_forms(scalar({{{1, 0, 0, 0}, 1.0}}), p, 0.1);
  EXPECT_NEAR(std::abs(z1.du(0, kDz1) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(z1.dbar_u.norm(), 0.0, 1e-14);
  const DiscreteForms zb1 = fd_forms(scalar({{{0, 1, 0, 0}, 1.0}}), p, 0.1);
  EXPECT_NEAR(zb1.du.norm(), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(zb1.dbar_u(0, kDzb1) - 1.0), 0.0, 1e-14);
}

TEST(FdForms, SecondOrderAgainstAnalytic) {
  const Polynomial u = scalar({{{3, 0, 1, 0}, 1.0}, {{0, 2, 0, 1}, cd(0.0, 1.0)}});
  const Point4 p{0.3, -0.2, 0.1, 0.4};
  const DiscreteForms ex = exact_forms(u, p);
  const auto err = [&](double h) {
    const DiscreteForms f = fd_forms(u, p, h);
    return (f.du - ex.du).norm() + (f.dbar_u - ex.dbar_u).norm();
  };
  const double order = std::log2(err(0.02) / err(0.01));
  EXPECT_NEAR(order, 2.0, 0.1);
}

TEST(Polynomial, DerivativeAndJson) {
  const Polynomial u = scalar({{{2, 0, 1, 0}, cd(1.0, 2.0)}});
  const Polynomial d = u.derivative(0);
  const Point4 p{0.5, 0.0, 1.0, 0.0};
  // d/dz1 (z1^2 z2) = 2 z1 z2
  EXPECT_NEAR(std::abs(d(p)[0] - cd(1.0, 2.0) * 2.0 * 0.5 * 1.0), 0.0, 1e-14);
  const Polynomial back = Polynomial::from_json(u.to_json());
  EXPECT_NEAR(std::abs(back(p)[0] - u(p)[0]), 0.0, 1e-14);
  EXPECT_THROW(Polynomial::from_json("[{\"powers\": [1, 0]}]"), Error);
}

TEST(Form4, HolomorphicAndConstantVanish) {
  // Central differences are exact on quadratics, so both sides vanish.
  const auto hol = check_form4(scalar({{{1, 0, 1, 0}, 1.0}, {{0, 0, 2, 0}, 2.0}}), small_probe());
  EXPECT_LT(hol.residual_h, 1e-10);
  EXPECT_LT(hol.discrete_defect, 1e-10);
  // For a holomorphic cubic the discrete d''u is O(h^2) and both sides are
  // quadratic in it.
  const auto cubic = check_form4(scalar({{{2, 0, 1, 0}, 1.0}, {{0, 0, 3, 0}, 2.0}}), small_probe());
  ASSERT_TRUE(cubic.order_reported);
  EXPECT_NEAR(cubic.observed_order, 4.0, 0.3);
  const auto cst = check_form4(scalar({{{0, 0, 0, 0}, 3.0}}), small_probe());
  EXPECT_EQ(cst.residual_h, 0.0);
}

TEST(Form4, SecondOrderOnGenerators) {
  for (const Polynomial& g : reference_generators()) {
    const ResidualReport r = check_form4(g, small_probe());
    ASSERT_TRUE(r.order_reported);
    EXPECT_GE(r.observed_order, 1.8);
    EXPECT_LE(r.observed_order, 2.2);
  }
}

TEST(Commutation, BilinearIsExact) {
  const auto r = check_commutation(scalar({{{1, 0, 0, 1}, 1.0}}), small_probe());
  EXPECT_LT(r.residual_h, 1e-10);
  EXPECT_FALSE(r.order_reported);
  EXPECT_EQ(check_commutation(scalar({{{0, 0, 0, 0}, 1.0}}), small_probe()).residual_h, 0.0);
}

TEST(Commutation, SecondOrderOnPolynomial) {
  const auto r = check_commutation(reference_generators().front(), small_probe());
  ASSERT_TRUE(r.order_reported);
  EXPECT_NEAR(r.observed_order, 2.0, 0.2);
}

TEST(Siu, PluriharmonicVanishes) {
  const Polynomial u = scalar({{{2, 0, 1, 0}, 1.0}, {{0, 1, 0, 2}, cd(0.0, 1.0)}});
  const SiuDensities d = siu_densities(u, {0.1, 0.2, -0.3, 0.4}, 0.05);
  EXPECT_LT(std::abs(d.original), 1e-10);
  EXPECT_LT(std::abs(d.modified), 1e-10);
  EXPECT_LT(d.rhs, 1e-20);
}

TEST(Siu, CalibrationMap) {
  Eigen::VectorXcd v(2);
  v << cd(1.0, -1.0), cd(0.5, 2.0);
  const Polynomial u = calibration_generator(v);
  for (const Point4 p : {Point4{0.1, 0.2, -0.3, 0.4}, Point4{-0.7, 0.0, 0.2, 0.9}}) {
    const SiuDensities d = siu_densities(u, p, 1.0 / 16);
    EXPECT_NEAR(d.original.real(), 8.0 * v.squaredNorm(), 1e-10);
    EXPECT_NEAR(d.modified.real(), 2.0 * d.original.real(), 1e-10);
  }
}

TEST(Siu, GeneratorsConverge) {
  const SiuReport r = siu_residual_flat(reference_generators()[1], small_probe());
  EXPECT_LT(r.harmonic_defect, 1e-10);
  ASSERT_TRUE(r.original.order_reported);
  EXPECT_NEAR(r.original.observed_order, 2.0, 0.2);
  EXPECT_NEAR(r.factor_two.observed_order, 2.0, 0.2);
}

TEST(Probe, SmallMeshRejected) {
  ProbeOptions o;
  o.mesh = 4;
  EXPECT_THROW(probe_nodes(o), DomainError);
}

TEST(Curvature, Examples) {
  EXPECT_EQ(hermitian_curvature_value(2, Eigen::MatrixXcd::Zero(3, 3)), 0.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXcd x(3);
    x << cd(g(rng), g(rng)), cd(g(rng), g(rng)), cd(g(rng), g(rng));
    EXPECT_LE(hermitian_curvature_value(2, x * x.adjoint()), 1e-12);
  }
  const CurvatureProbe p = hermitian_negativity_probe(3, 500, 7);
  EXPECT_LE(p.max_value, 1e-9);
  EXPECT_EQ(p.samples, 500);
  EXPECT_NEAR(p.sectional_fd, p.sectional_formula, 1e-3 * std::abs(p.sectional_formula));
}
