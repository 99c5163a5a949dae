#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "npch/errors.hpp"
#include "npch/isometry.hpp"
#include "npch/npc_core.hpp"
#include "npch/spaces.hpp"

using namespace npch;
using cd = std::complex<double>;

namespace {

// Upper half-plane distance, independent of the disk formulas.
double half_plane_distance(cd w1, cd w2) {
  const cd z1 = disk_to_half_plane(w1), z2 = disk_to_half_plane(w2);
  return std::acosh(1.0 + std::norm(z1 - z2) / (2.0 * z1.imag() * z2.imag()));
}

// Star with three unit legs: centre 0, leaves 1..3.
MetricTree star() { return MetricTree({"o", "a", "b", "c"}, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}}); }

// Brute-force tree distance on a star: offsets measured from the centre.
double star_distance(const TreePoint& p, const TreePoint& q) {
  return p.edge == q.edge ? std::abs(p.offset - q.offset) : p.offset + q.offset;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST(Distance, Examples) {
  const SpaceDescriptor e = EuclideanSpace(2);
  EXPECT_DOUBLE_EQ(distance(e, Vector(Vector::Zero(2)), Vector((Vector(2) << 3.0, 4.0).finished())), 5.0);
  const SpaceDescriptor s = SpdManifold(2);
  EXPECT_NEAR(distance(s, Matrix(Matrix::Identity(2, 2)), diag2(std::exp(2.0), std::exp(-2.0))), 2.0 * std::sqrt(2.0), 1e-13);
  const MetricTree t = star();
  EXPECT_NEAR(t.distance(t.on_edge(0, 0.5), t.on_edge(1, 0.5)), 1.0, 1e-15);
}

TEST(Distance, HyperbolicAgreesWithHalfPlane) {
  const HyperbolicPlane h;
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const cd a = h.sample(rng, 3.0), b = h.sample(rng, 3.0);
    EXPECT_NEAR(h.distance(a, b), half_plane_distance(a, b), 1e-9 * (1.0 + half_plane_distance(a, b)));
  }
}

TEST(Distance, TreeBruteForce) {
  const MetricTree t = star();
  std::uniform_int_distribution<int> edge(0, 2);
  std::uniform_real_distribution<double> off(0.0, 1.0);
  std::mt19937_64 rng(6);
  for (int k = 0; k < 200; ++k) {
    const TreePoint p{edge(rng), off(rng)}, q{edge(rng), off(rng)};
    EXPECT_NEAR(t.distance(t.canonical(p), t.canonical(q)), star_distance(p, q), 1e-13);
  }
}

TEST(Interp, Endpoints) {
  const HyperbolicPlane h;
  const cd p(0.1, 0.2), q(-0.4, 0.3);
  EXPECT_NEAR(std::abs(h.interp(p, q, 0.0) - p), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(h.interp(p, q, 1.0) - q), 0.0, 1e-12);
}

TEST(Interp, SpdHalfway) {
  const SpaceDescriptor s = SpdManifold(2);
  const Point m = interp(s, Matrix(Matrix::Identity(2, 2)), diag2(std::exp(2.0), 1.0), 0.5);
  EXPECT_LT((std::get<Matrix>(m) - diag2(std::exp(1.0), 1.0)).norm(), 1e-13);
}

TEST(Interp, TreeThroughSharedVertex) {
  const MetricTree t = star();
  const TreePoint a = t.on_edge(0, 0.8), b = t.on_edge(1, 0.8);
  const TreePoint m = t.interp(a, b, 0.5);
  EXPECT_NEAR(t.distance(m, a), 0.8, 1e-14);
  EXPECT_NEAR(t.distance(m, b), 0.8, 1e-14);
  EXPECT_EQ(t.vertex_at(m), 0);
}

TEST(Interp, GeodesicDistanceBisection) {
  const HyperbolicPlane h;
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const cd p = h.sample(rng, 2.0), q = h.sample(rng, 2.0);
    const double d = h.distance(p, q);
    for (double t : {0.25, 0.5, 0.9}) {
      const cd m = h.interp(p, q, t);
      EXPECT_NEAR(half_plane_distance(p, m), t * d, 1e-9);
      EXPECT_NEAR(half_plane_distance(m, q), (1.0 - t) * d, 1e-9);
    }
  }
}

TEST(NpcInequality, AllSpaces) {
  EXPECT_GE(check_npc_inequality(EuclideanSpace(2), 1000, 1).residual, -1e-12);
  EXPECT_GE(check_npc_inequality(HyperbolicPlane{}, 1000, 2).residual, -1e-12);
  EXPECT_GE(check_npc_inequality(SpdManifold(3), 500, 3).residual, -1e-9);
  EXPECT_GE(check_npc_inequality(star(), 1000, 4).residual, -1e-12);
}

TEST(NpcInequality, SameSeedSameResult) {
  const auto a = check_npc_inequality(SpdManifold(2), 200, 42);
  const auto b = check_npc_inequality(SpdManifold(2), 200, 42);
  EXPECT_EQ(a.residual, b.residual);
  EXPECT_EQ(a.samples, 200);
}

TEST(CatKappa, SupportedAndUnsupported) {
  EXPECT_GE(check_cat_kappa(HyperbolicPlane{}, 1.0, 1000, 5).residual, -1e-9);
  EXPECT_GE(check_cat_kappa(star(), 1.0, 1000, 6).residual, -1e-9);
  EXPECT_GE(check_cat_kappa(star(), 7.0, 300, 6).residual, -1e-9);
  EXPECT_THROW(check_cat_kappa(EuclideanSpace(2), 1.0, 10, 1), UnsupportedSpace);
}

TEST(Barycenter, Examples) {
  const SpaceDescriptor e = EuclideanSpace(2);
  const std::vector<Point> pe{Vector(Vector::Zero(2)), Vector((Vector(2) << 2.0, 0.0).finished())};
  const std::vector<double> w{0.5, 0.5};
  const Vector be = std::get<Vector>(barycenter(e, pe, w));
  EXPECT_NEAR(be[0], 1.0, 1e-12);
  EXPECT_NEAR(be[1], 0.0, 1e-12);

  const SpaceDescriptor s = SpdManifold(2);
  const std::vector<Point> ps{Matrix(Matrix::Identity(2, 2)), diag2(std::exp(2.0), std::exp(-2.0))};
  const Matrix bs = std::get<Matrix>(barycenter(s, ps, w));
  EXPECT_LT((bs - diag2(std::exp(1.0), std::exp(-1.0))).norm(), 1e-9);
}

TEST(Barycenter, TreeGridSearch) {
  const MetricTree t = star();
  const std::vector<TreePoint> pts{t.on_edge(0, 0.9), t.on_edge(1, 0.9), t.on_edge(2, 0.9)};
  const std::vector<double> w{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const TreePoint b = t.barycenter(pts, w);
  // Brute-force minimiser of the weighted squared distance over a fine grid.
  double best = 1e300;
  TreePoint arg;
  for (int e = 0; e < 3; ++e)
    for (int k = 0; k <= 1000; ++k) {
      const TreePoint x{e, k / 1000.0};
      double f = 0.0;
      for (const auto& p : pts) f += std::pow(star_distance(x, p), 2) / 3.0;
      if (f < best) best = f, arg = x;
    }
  EXPECT_NEAR(t.distance(b, t.canonical(arg)), 0.0, 1e-3);
  EXPECT_EQ(t.vertex_at(b, 1e-9), 0);
}

TEST(Barycenter, HyperbolicSymmetricPair) {
  const HyperbolicPlane h;
  const std::vector<cd> pts{cd(0.5, 0.0), cd(-0.5, 0.0)};
  const std::vector<double> w{0.5, 0.5};
  EXPECT_LT(std::abs(h.barycenter(pts, w)), 1e-10);
}

TEST(Validation, BadPoints) {
  EXPECT_THROW(validate_point(HyperbolicPlane{}, cd(1.5, 0.0)), InvalidPoint);
  EXPECT_THROW(validate_point(EuclideanSpace(2), Vector(Vector::Zero(3))), InvalidPoint);
  EXPECT_THROW(distance(EuclideanSpace(2), cd(0.0, 0.0), cd(0.0, 0.0)), InvalidPoint);
  EXPECT_THROW(MetricTree({"a", "b", "c"}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}), InvalidPoint);
}

TEST(MetricTreeJson, RoundTrip) {
  const MetricTree t = MetricTree::from_json(
      R"({"vertices": ["c", "a", "b"], "edges": [{"from": "c", "to": "a", "length": 1.0},)"
      R"( {"from": "c", "to": "b", "length": 2.5}]})");
  EXPECT_EQ(t.vertex_count(), 3);
  EXPECT_NEAR(t.vertex_distance(1, 2), 3.5, 1e-15);
  const MetricTree u = MetricTree::from_json(t.to_json());
  EXPECT_NEAR(u.vertex_distance(1, 2), 3.5, 1e-15);
}
