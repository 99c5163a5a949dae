#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "npch/errors.hpp"
#include "npch/isometry.hpp"
#include "npch/spd.hpp"

using namespace npch;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(TranslationLength, Examples) {
  EXPECT_DOUBLE_EQ(translation_length_lower_bound(Matrix::Identity(3, 3)), 0.0);
  EXPECT_NEAR(translation_length_lower_bound(mat2(3, 0, 0, 1.0 / 3)), std::sqrt(2.0) * std::log(9.0), 1e-12);
  EXPECT_NEAR(translation_length_lower_bound(mat2(1, 1, 0, 1)), 0.0, 1e-12);
}

TEST(TranslationLength, CoarseGridMinimumAttainsBound) {
  // Grid over diagonal SPD points diag(e^a, e^b); the axis is the diagonal set.
  const Matrix g = mat2(3, 0, 0, 1.0 / 3);
  double best = 1e300;
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j) {
      Matrix p = Matrix::Zero(2, 2);
      p(0, 0) = std::exp(0.2 * i);
      p(1, 1) = std::exp(0.2 * j);
      best = std::min(best, spd_distance(p, group_action(g, p)));
    }
  EXPECT_NEAR(best, 3.1073447968483734, 1e-12);
  EXPECT_NEAR(minimize_displacement(g).value, best, 1e-4);
}

TEST(TranslationLength, NeverExceedsDisplacement) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  const SpdManifold s(3);
  for (int k = 0; k < 30; ++k) {
    Matrix g(3, 3);
    for (int i = 0; i < 9; ++i) g.data()[i] = n01(rng);
    const double rho = translation_length_lower_bound(g);
    for (int m = 0; m < 10; ++m) {
      const Matrix p = s.sample(rng, 2.0);
      EXPECT_LE(rho, s.distance(p, group_action(g, p)) + 1e-8);
    }
  }
}

TEST(Classify, Examples) {
  Eigen::Matrix2d h;
  h << 2.618033988749895, 0.0, 0.0, 0.381966011250105;  // trace 3
  EXPECT_EQ(classify_isometry(MobiusMap(h)), IsometryClass::hyperbolic);
  Eigen::Matrix2d p;
  p << 1, 1, 0, 1;
  EXPECT_EQ(classify_isometry(MobiusMap(p)), IsometryClass::parabolic);
  Eigen::Matrix2d r;
  r << std::cos(0.3), std::sin(0.3), -std::sin(0.3), std::cos(0.3);
  EXPECT_EQ(classify_isometry(MobiusMap(r)), IsometryClass::elliptic);

  EXPECT_EQ(classify_isometry(SpdIsometry(mat2(1, 1, 0, 1))), IsometryClass::parabolic);
  EXPECT_EQ(classify_isometry(SpdIsometry(mat2(0, -1, 1, 0))), IsometryClass::elliptic);
  EXPECT_EQ(classify_isometry(SpdIsometry(mat2(3, 0, 0, 1.0 / 3))), IsometryClass::hyperbolic);
}

TEST(Iwasawa, Examples) {
  const Matrix rot = mat2(0, -1, 1, 0);
  Iwasawa w = iwasawa(rot);
  EXPECT_LT((w.O - rot).norm(), 1e-14);
  EXPECT_LT((w.A - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((w.N - Matrix::Identity(2, 2)).norm(), 1e-14);

  w = iwasawa(mat2(2, 0, 0, 3));
  EXPECT_LT((w.O - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((w.A - mat2(2, 0, 0, 3)).norm(), 1e-14);

  w = iwasawa(mat2(1, 1, 0, 1));
  EXPECT_LT((w.N - mat2(1, 1, 0, 1)).norm(), 1e-14);
}

TEST(Iwasawa, ReconstructsRandom) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01;
  for (int n = 2; n <= 4; ++n) {
    Matrix g(n, n);
    for (int i = 0; i < n * n; ++i) g.data()[i] = n01(rng);
    const Iwasawa w = iwasawa(g);
    EXPECT_LT((w.O * w.A * w.N - g).norm(), 1e-12 * g.norm());
    EXPECT_LT((w.O.transpose() * w.O - Matrix::Identity(n, n)).norm(), 1e-12);
    for (int i = 0; i < n; ++i) {
      EXPECT_GT(w.A(i, i), 0.0);
      EXPECT_NEAR(w.N(i, i), 1.0, 1e-14);
      for (int j = 0; j < i; ++j) EXPECT_EQ(w.N(i, j), 0.0);
    }
  }
}

TEST(DecayFit, ConstantSeries) {
  std::vector<double> t, d;
  for (int i = 0; i < 100; ++i) t.push_back(i * 0.1), d.push_back(1.7);
  const DecayFit f = fit_exponential_decay(t, d);
  EXPECT_NEAR(f.delta, 1.7, 1e-12);
  EXPECT_NEAR(f.b, 0.0, 1e-12);
}

TEST(DecayFit, Synthetic) {
  std::vector<double> t, d;
  for (int i = 0; i <= 400; ++i) {
    t.push_back(i * 0.05);
    d.push_back(2.0 + 0.5 * std::exp(-0.7 * t.back()));
  }
  const DecayFit f = fit_exponential_decay(t, d);
  EXPECT_NEAR(f.delta, 2.0, 1e-4);
  EXPECT_NEAR(f.a, 0.7, 1e-2);
  EXPECT_NEAR(f.b, 0.5, 1e-2);
  EXPECT_GT(f.r_squared, 0.999);
}

TEST(DecayFit, IncreasingRejected) {
  std::vector<double> t, d;
  for (int i = 0; i < 50; ++i) t.push_back(i), d.push_back(1.0 + 0.1 * i);
  EXPECT_THROW(fit_exponential_decay(t, d), FitError);
}

TEST(DecayRay, ParabolicClosedForm) {
  const SpdDecayRay ray = spd_decay_ray(mat2(1, 1, 0, 1));
  const RaySeries s = decay_ray(ray, 5.0, 40.0, 400);
  EXPECT_LE(s.fit.delta, 1e-6);
  EXPECT_GT(s.fit.a, 0.0);
  EXPECT_GE(s.fit.r_squared, 0.99);
  // The conjugated off-diagonal entry decays like exp(-t (v0 - v1) / 2).
  const double gap = ray.direction(0) - ray.direction(1);
  for (double t : {10.0, 20.0, 30.0}) {
    const Matrix c = ray.point(t);
    const Matrix n = spd_inv_sqrt(c) * mat2(1, 1, 0, 1) * spd_sqrt(c);
    EXPECT_NEAR(n(0, 1) / std::exp(-t * gap / 2.0), 1.0, 1e-6);
  }
  for (std::size_t i = s.t.size() / 2; i + 1 < s.t.size(); ++i) EXPECT_LT(s.displacement[i + 1], s.displacement[i]);
}

TEST(DecayRay, DiskParabolic) {
  Eigen::Matrix2d p;
  p << 1, 1, 0, 1;
  const RaySeries s = decay_ray(disk_decay_ray(MobiusMap(p)), 5.0, 40.0, 400);
  EXPECT_LE(s.fit.delta, 1e-6);
  EXPECT_GT(s.fit.a, 0.0);
}

TEST(MeasureDisplacement, Examples) {
  const SpdIsometry id(Matrix::Identity(2, 2));
  const SpdIsometry hyp(mat2(3, 0, 0, 1.0 / 3));
  std::vector<Point> axis;
  for (int k = 0; k < 10; ++k) {
    Matrix p = Matrix::Zero(2, 2);
    p(0, 0) = std::exp(0.3 * k);
    p(1, 1) = std::exp(-0.3 * k);
    axis.push_back(p);
  }
  for (double d : measure_displacement(id, axis)) EXPECT_NEAR(d, 0.0, 1e-12);
  for (double d : measure_displacement(hyp, axis)) EXPECT_NEAR(d, std::sqrt(2.0) * std::log(9.0), 1e-10);
}

TEST(MinEnergyConstant, Examples) {
  EXPECT_DOUBLE_EQ(min_energy_constant(0.0), 0.0);
  EXPECT_NEAR(min_energy_constant(2.0 * std::numbers::pi), 2.0 * std::numbers::pi, 1e-14);
  const double rho = std::sqrt(2.0) * std::log(9.0);
  EXPECT_NEAR(min_energy_constant(SpdIsometry(mat2(3, 0, 0, 1.0 / 3))), rho * rho / (2.0 * std::numbers::pi), 1e-12);
  EXPECT_THROW(min_energy_constant(-1.0), DomainError);
}

TEST(FlatTorus, IdentityPairIsConstant) {
  const FlatTorusMap h = flat_torus_map(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  EXPECT_LT((h(0.3, 1.1) - h(4.0, 5.5)).norm(), 1e-14);
}

TEST(FlatTorus, HyperbolicDerivatives) {
  const double e = std::exp(1.0);
  const FlatTorusMap h = flat_torus_map(mat2(e, 0, 0, 1 / e), mat2(e * e, 0, 0, 1 / (e * e)));
  const double c = 4.0 * std::numbers::pi * std::numbers::pi;
  const TorusDerivatives d = torus_derivatives(h, 1.0, 2.0);
  EXPECT_NEAR(d.dx_sq, 8.0 / c, 1e-8);
  EXPECT_NEAR(d.dy_sq, 32.0 / c, 1e-8);
}

TEST(FlatTorus, EllipticFixingAxisIsConstantInY) {
  const double e = std::exp(1.0);
  const FlatTorusMap h = flat_torus_map(mat2(e, 0, 0, 1 / e), mat2(1, 0, 0, -1));
  for (double x : {0.0, 1.0, 3.0}) EXPECT_LT((h(x, 0.0) - h(x, 2.5)).norm(), 1e-12);
}

TEST(AlmostFlatTorus, DecayingXDerivative) {
  const AlmostFlatTorusMap a = almost_flat_torus_map(mat2(1, 1, 0, 1), mat2(1, 1, 0, 1));
  const double d10 = torus_derivatives(a, 10.0, 0.5, 0.5).dx_sq;
  const double d30 = torus_derivatives(a, 30.0, 0.5, 0.5).dx_sq;
  EXPECT_LT(d30, d10);
  EXPECT_LT(d30, 1e-6);
  EXPECT_LE(torus_derivatives(a, 10.0, 0.5, 0.5).dt_sq, 1.0 + 1e-8);
}

TEST(AlmostFlatTorus, NonCommutingRejected) {
  EXPECT_THROW(almost_flat_torus_map(mat2(1, 1, 0, 1), mat2(1, 0, 1, 1)), DomainError);
  EXPECT_THROW(flat_torus_map(mat2(2, 0, 0, 0.5), mat2(1, 1, 0, 1)), DomainError);
}
