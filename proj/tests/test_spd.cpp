#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "npch/errors.hpp"
#include "npch/spd.hpp"

using namespace npch;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Matrix random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + 0.5 * Matrix::Identity(n, n);
}

// Affine-invariant distance from generalized eigenvalues of (q, p).
double oracle_distance(const Matrix& p, const Matrix& q) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(q, p);
  return std::sqrt(es.eigenvalues().array().log().square().sum());
}

}  // namespace

TEST(SymEig, DiagonalInput) {
  const SymEig e = sym_eig(diag2(3.0, 1.0));
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
  EXPECT_NEAR((e.rotation.cwiseAbs() - Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
}

TEST(SymEig, FortyFiveDegrees) {
  Matrix s(2, 2);
  s << 2.0, 1.0, 1.0, 2.0;
  const SymEig e = sym_eig(s);
  EXPECT_NEAR(e.values[0], 3.0, 1e-13);
  EXPECT_NEAR(e.values[1], 1.0, 1e-13);
  EXPECT_NEAR(std::abs(e.rotation(0, 0)), std::sqrt(0.5), 1e-13);
  const Matrix back = e.rotation * e.values.asDiagonal() * e.rotation.transpose();
  EXPECT_LT((back - s).norm(), 1e-13);
}

TEST(SymEig, IdentityFour) {
  const SymEig e = sym_eig(Matrix::Identity(4, 4));
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(e.values[i], 1.0);
}

TEST(SymEig, MatchesLapackStyleSolver) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 6; ++n) {
    Matrix a = random_spd(rng, n) - 2.0 * Matrix::Identity(n, n);
    const SymEig e = sym_eig(a);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    Vector ours = e.values;
    std::sort(ours.data(), ours.data() + n);
    EXPECT_LT((ours - ref.eigenvalues()).norm(), 1e-11 * (1.0 + a.norm()));
    EXPECT_LT((e.rotation.transpose() * e.rotation - Matrix::Identity(n, n)).norm(), 1e-12);
  }
}

TEST(SpdExp, AgreesWithMatrixExponential) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 4; ++n) {
    Matrix a = random_spd(rng, n);
    const Matrix v = 0.3 * (a + a.transpose());
    EXPECT_LT((sym_exp(v) - Matrix(v.exp())).norm(), 1e-10 * Matrix(v.exp()).norm());
  }
}

TEST(SpdExp, Examples) {
  const Matrix e = Matrix::Identity(2, 2);
  EXPECT_LT((spd_exp(e, diag2(1.0, -1.0), 1.0) - diag2(std::exp(1.0), std::exp(-1.0))).norm(), 1e-13);
  for (double t : {0.0, 0.5, 3.0}) EXPECT_LT((spd_exp(e, Matrix::Zero(2, 2), t) - e).norm(), 1e-15);
  const Matrix b = diag2(4.0, 1.0);
  EXPECT_LT((spd_exp(b, spd_log(b, e), 1.0) - e).norm(), 1e-12);
}

TEST(SpdDistance, Anchor) {
  const double d = spd_distance(Matrix::Identity(2, 2), diag2(std::exp(2.0), std::exp(-2.0)));
  EXPECT_NEAR(d, 2.0 * std::sqrt(2.0), 1e-13);
}

TEST(SpdDistance, PolylineLengthAlongGeodesic) {
  const Matrix p = Matrix::Identity(2, 2);
  const Matrix q = diag2(std::exp(2.0), std::exp(-2.0));
  const int steps = 10000;
  double len = 0.0;
  Matrix prev = p;
  for (int k = 1; k <= steps; ++k) {
    const Matrix cur = spd_geodesic(p, q, static_cast<double>(k) / steps);
    len += oracle_distance(prev, cur);
    prev = cur;
  }
  EXPECT_NEAR(len, spd_distance(p, q), 1e-6);
}

TEST(SpdDistance, GeneralizedEigenOracle) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 3;
    const Matrix p = random_spd(rng, n), q = random_spd(rng, n);
    EXPECT_NEAR(spd_distance(p, q), oracle_distance(p, q), 1e-9);
  }
}

TEST(SpdGeodesic, HalfwayDiagonal) {
  const Matrix m = spd_geodesic(Matrix::Identity(2, 2), diag2(std::exp(2.0), 1.0), 0.5);
  EXPECT_LT((m - diag2(std::exp(1.0), 1.0)).norm(), 1e-13);
}

TEST(SpdLog, Examples) {
  const Matrix v = spd_log(Matrix::Identity(2, 2), diag2(std::exp(2.0), 1.0));
  EXPECT_LT((v - diag2(2.0, 0.0)).norm(), 1e-13);
  std::mt19937_64 rng(8);
  const Matrix p = random_spd(rng, 3);
  EXPECT_LT(spd_log(p, p).norm(), 1e-12);
}

TEST(SpdLog, RoundTrip) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 3;
    const Matrix p = random_spd(rng, n), q = random_spd(rng, n);
    EXPECT_LT((spd_exp(p, spd_log(p, q), 1.0) - q).norm(), 1e-9 * (1.0 + q.norm()));
  }
}

TEST(GroupAction, Examples) {
  std::mt19937_64 rng(1);
  const Matrix p = random_spd(rng, 2);
  EXPECT_LT((group_action(Matrix::Identity(2, 2), p) - p).norm(), 1e-15);
  EXPECT_LT((group_action(diag2(2.0, 1.0), Matrix::Identity(2, 2)) - diag2(4.0, 1.0)).norm(), 1e-15);
}

TEST(GroupAction, IsAnIsometry) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    Matrix a(3, 3);
    for (int i = 0; i < 9; ++i) a.data()[i] = g(rng);
    const Matrix p = random_spd(rng, 3), q = random_spd(rng, 3);
    EXPECT_NEAR(spd_distance(group_action(a, p), group_action(a, q)), spd_distance(p, q), 1e-8);
  }
}

TEST(SpdValidation, Rejects) {
  EXPECT_THROW(validate_spd(diag2(1.0, -1.0)), InvalidPoint);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(validate_spd(asym), InvalidPoint);
  EXPECT_THROW(spd_distance(Matrix::Identity(2, 2), diag2(0.0, 1.0)), InvalidPoint);
}
