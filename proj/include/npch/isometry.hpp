#pragma once

// Isometries of the four model spaces: classification, translation lengths,
// Iwasawa factors, decay rays and their exponential fits, and equivariant
// torus maps for commuting pairs.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "npch/spaces.hpp"

namespace npch {

enum class IsometryClass { elliptic, hyperbolic, parabolic };
std::string to_string(IsometryClass c);

// x -> R x + s
struct EuclideanMotion {
  Matrix rotation;
  Vector shift;
  EuclideanMotion(Matrix r, Vector s);
  Vector apply(const Vector& x) const { return rotation * x + shift; }
  EuclideanMotion inverse() const;
};

// Real 2x2 matrix of determinant 1, acting on the upper half plane by
// z -> (az+b)/(cz+d) and on the disk through w = (z-i)/(z+i).
struct MobiusMap {
  Eigen::Matrix2d sl2;
  explicit MobiusMap(const Eigen::Matrix2d& m);
  std::complex<double> apply(std::complex<double> w) const;
  MobiusMap inverse() const;
  double trace() const { return sl2.trace(); }
};

// Cayley transform between the upper half plane and the disk.
std::complex<double> half_plane_to_disk(std::complex<double> z);
std::complex<double> disk_to_half_plane(std::complex<double> w);

struct SpdIsometry {
  Matrix g;
  explicit SpdIsometry(Matrix m);
  Matrix apply(const Matrix& p) const { return group_action(g, p); }
  SpdIsometry inverse() const;
};

// Vertex permutation preserving adjacency and edge lengths.
struct TreeAutomorphism {
  MetricTree tree;
  std::vector<int> perm;
  TreeAutomorphism(MetricTree t, std::vector<int> p);
  TreePoint apply(const TreePoint& p) const;
  TreeAutomorphism inverse() const;
};

using IsometryDescriptor = std::variant<EuclideanMotion, MobiusMap, SpdIsometry, TreeAutomorphism>;

template <class G> struct isometry_for;
template <> struct isometry_for<EuclideanSpace> { using type = EuclideanMotion; };
template <> struct isometry_for<HyperbolicPlane> { using type = MobiusMap; };
template <> struct isometry_for<SpdManifold> { using type = SpdIsometry; };
template <> struct isometry_for<MetricTree> { using type = TreeAutomorphism; };
template <class G> using isometry_t = typename isometry_for<G>::type;

SpaceDescriptor space_of(const IsometryDescriptor& iso);
Point apply_isometry(const IsometryDescriptor& iso, const Point& p);

struct ClassifyOptions {
  double condition_threshold = 1e8;
  double zero_tol = 1e-10;
};

// sqrt(sum_i (log |b_i|^2)^2) over the complex eigenvalues b_i of g.
double translation_length_lower_bound(const Matrix& g);
bool is_semisimple(const Matrix& g, double condition_threshold = 1e8);
IsometryClass classify_isometry(const IsometryDescriptor& iso, const ClassifyOptions& opt = {});
// Closed-form infimum of the displacement function.
double translation_length(const IsometryDescriptor& iso);

struct Iwasawa {
  Matrix O;
  Matrix A;
  Matrix N;
};
Iwasawa iwasawa(const Matrix& g);

struct DecayFit {
  double delta = 0.0;
  double a = 0.0;
  double b = 0.0;
  double r_squared = 1.0;
  IsometryClass classification = IsometryClass::elliptic;
  double tail_start = 0.0;
  int tail_points = 0;
};

struct FitOptions {
  double tail_fraction = 0.5;
  double eps_floor = 1e-14;
  double monotone_tol = 1e-9;  // relative allowance for upward noise in the tail
};

DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> d, const FitOptions& opt = {});

// Ray c(t) = S exp(tV) S^T with unit-norm diagonal V. In the frame S the
// generator is M = S^-1 G S, block upper triangular with scaled rotations on
// the diagonal blocks, and V is constant on each block.
struct SpdDecayRay {
  Matrix g;
  Matrix frame;      // S
  Matrix generator;  // M
  Vector direction;  // diag of V
  std::vector<int> block_start;
  IsometryClass classification = IsometryClass::elliptic;

  Matrix point(double t) const;
  // exp(-tV/2) M exp(tV/2), i.e. c(t)^{-1/2} G c(t)^{1/2} in the frame.
  Matrix conjugated(double t) const;
  // d(c(t), G.c(t)) evaluated in the frame.
  double displacement(double t) const;
};

SpdDecayRay spd_decay_ray(const Matrix& g, const ClassifyOptions& opt = {});

// Geodesic ray in the disk: toward the parabolic fixed point, along the axis,
// or resting at the fixed point of an elliptic map.
struct DiskDecayRay {
  MobiusMap m;
  Eigen::Matrix2d frame;      // F: the ray is F(i e^t) in the half plane
  Eigen::Matrix2d generator;  // F^-1 m F
  IsometryClass classification = IsometryClass::elliptic;
  bool degenerate = false;  // elliptic: the ray is the fixed point
  std::complex<double> point(double t) const;
  double displacement(double t) const;
};

DiskDecayRay disk_decay_ray(const MobiusMap& m, const ClassifyOptions& opt = {});

struct RaySeries {
  std::vector<double> t;
  std::vector<double> displacement;
  DecayFit fit;
};

std::vector<double> sample_times(double tmin, double tmax, int steps);
RaySeries analyze_ray(const std::function<double(double)>& displacement, double tmin, double tmax, int steps,
                      const FitOptions& opt = {});
RaySeries decay_ray(const SpdDecayRay& ray, double tmin, double tmax, int steps, const FitOptions& opt = {});
RaySeries decay_ray(const DiskDecayRay& ray, double tmin, double tmax, int steps, const FitOptions& opt = {});

std::vector<double> measure_displacement(const IsometryDescriptor& iso, std::span<const Point> ray_points);

struct DisplacementMinimum {
  double value = 0.0;
  Matrix point;
};
// Coarse grid over log-coordinates followed by Nelder-Mead descent; the search
// is confined to distance <= radius_cap from the identity.
DisplacementMinimum minimize_displacement(const Matrix& g, int grid = 5, double grid_radius = 2.0,
                                          double radius_cap = 1e3);

double min_energy_constant(double delta);
double min_energy_constant(const IsometryDescriptor& iso);

// Squared metric norm Tr((p^-1 V)^2) of a tangent vector at p, evaluated in
// whitened coordinates.
double spd_norm_sq(const Matrix& p, const Matrix& v);

struct FlatTorusMap {
  Matrix frame;
  Vector log1;
  Vector log2;
  Matrix g1;
  Matrix g2;
  double delta1 = 0.0;
  double delta2 = 0.0;
  Matrix operator()(double x, double y) const;
};

FlatTorusMap flat_torus_map(const Matrix& g1, const Matrix& g2, const ClassifyOptions& opt = {});

struct AlmostFlatTorusMap {
  SpdDecayRay ray;
  Matrix g1;
  Matrix g2;
  Matrix generator2;  // S^-1 g2 S
  DecayFit fit1;
  DecayFit fit2;
  Matrix operator()(double t, double x, double y) const;
  // The same map expressed in the ray frame (conjugated by S^-1).
  Matrix in_frame(double t, double x, double y) const;
};

AlmostFlatTorusMap almost_flat_torus_map(const Matrix& g1, const Matrix& g2, double fit_tmin = 5.0,
                                         double fit_tmax = 40.0, int fit_steps = 400,
                                         const ClassifyOptions& opt = {});

struct TorusDerivatives {
  double dt_sq = 0.0;
  double dx_sq = 0.0;
  double dy_sq = 0.0;
};

// Central differences of step eps measured with the metric at the point.
TorusDerivatives torus_derivatives(const FlatTorusMap& h, double x, double y, double eps = 1e-4);
TorusDerivatives torus_derivatives(const AlmostFlatTorusMap& h, double t, double x, double y, double eps = 1e-4);

// A point of Min(I) (or a decay ray for parabolic I) as a curve s -> c(s);
// constant for semisimple isometries.
std::function<Matrix(double)> basepoint_curve(const SpdIsometry& iso);
std::function<std::complex<double>(double)> basepoint_curve(const MobiusMap& iso);
std::function<Vector(double)> basepoint_curve(const EuclideanMotion& iso);
std::function<TreePoint(double)> basepoint_curve(const TreeAutomorphism& iso);

}  // namespace npch
