#pragma once

// The four concrete NPC geometries. Every class exposes the same surface:
//
//   point_type, validate, distance, interp, barycenter, sample, equal
//
// and the three manifold targets additionally expose extrapolate(x, b, w),
// the point at parameter w on the geodesic from x through b (w may exceed 1).

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "npch/spd.hpp"

namespace npch {

struct Tolerance {
  double abs = 1e-9;
  double rel = 1e-9;
  double bound(double scale) const { return abs + rel * scale; }
};

// ---------------------------------------------------------------------------
class EuclideanSpace {
 public:
  using point_type = Vector;
  static constexpr const char* kName = "euclidean";

  explicit EuclideanSpace(int dim);
  int dim() const { return dim_; }

  void validate(const point_type& p) const;
  double distance(const point_type& p, const point_type& q) const;
  point_type interp(const point_type& p, const point_type& q, double t) const;
  point_type extrapolate(const point_type& x, const point_type& b, double w) const;
  point_type barycenter(std::span<const point_type> pts, std::span<const double> w, double tol = 1e-12,
                        const point_type* start = nullptr) const;
  point_type sample(std::mt19937_64& rng, double radius) const;
  bool equal(const point_type& p, const point_type& q, double tol = 1e-12) const;

 private:
  int dim_;
};

// ---------------------------------------------------------------------------
// Poincare disk model, curvature -1.
class HyperbolicPlane {
 public:
  using point_type = std::complex<double>;
  static constexpr const char* kName = "hyperbolic2";
  static constexpr double kMaxModulus = 1.0 - 1e-12;

  void validate(const point_type& p) const;
  double distance(const point_type& p, const point_type& q) const;
  point_type interp(const point_type& p, const point_type& q, double t) const;
  point_type extrapolate(const point_type& x, const point_type& b, double w) const;
  point_type barycenter(std::span<const point_type> pts, std::span<const double> w, double tol = 1e-13,
                        const point_type* start = nullptr) const;
  point_type sample(std::mt19937_64& rng, double radius) const;
  bool equal(const point_type& p, const point_type& q, double tol = 1e-12) const;

  // Tangent vectors are represented in the chart z -> (z - x)/(1 - conj(x) z)
  // that moves x to the origin; |log| equals the hyperbolic distance.
  point_type log(const point_type& x, const point_type& q) const;
  point_type exp(const point_type& x, const point_type& v) const;

  // Point at hyperbolic distance r from the origin in direction arg.
  static point_type from_polar(double r, double arg);
};

// ---------------------------------------------------------------------------
class SpdManifold {
 public:
  using point_type = Matrix;
  static constexpr const char* kName = "spd";

  explicit SpdManifold(int n);
  int n() const { return n_; }

  void validate(const point_type& p) const;
  double distance(const point_type& p, const point_type& q) const;
  point_type interp(const point_type& p, const point_type& q, double t) const;
  point_type extrapolate(const point_type& x, const point_type& b, double w) const;
  point_type barycenter(std::span<const point_type> pts, std::span<const double> w, double tol = 1e-13,
                        const point_type* start = nullptr) const;
  point_type sample(std::mt19937_64& rng, double radius) const;
  bool equal(const point_type& p, const point_type& q, double tol = 1e-12) const;

 private:
  int n_;
};

// ---------------------------------------------------------------------------
struct TreePoint {
  int edge = 0;
  double offset = 0.0;  // measured from the edge's `from` vertex
  friend bool operator==(const TreePoint&, const TreePoint&) = default;
};

struct TreeEdge {
  int from = 0;
  int to = 0;
  double length = 1.0;
};

class MetricTree {
 public:
  using point_type = TreePoint;
  static constexpr const char* kName = "tree";

  MetricTree(std::vector<std::string> vertex_names, std::vector<TreeEdge> edges);

  // {"vertices": [...], "edges": [{"from","to","length"}]}; vertices may be
  // names or integers, endpoints refer to them.
  static MetricTree from_json(const std::string& text);
  std::string to_json() const;

  int vertex_count() const;
  int edge_count() const;
  const TreeEdge& edge(int id) const;
  const std::vector<std::string>& vertex_names() const;
  int degree(int vertex) const;
  double vertex_distance(int a, int b) const;
  // Edge id joining two adjacent vertices, or -1.
  int edge_between(int a, int b) const;

  TreePoint vertex_point(int vertex) const;
  // Vertex index if the point sits on a vertex (within tol), else -1.
  int vertex_at(const TreePoint& p, double tol = 1e-12) const;
  TreePoint canonical(const TreePoint& p) const;
  TreePoint on_edge(int edge, double offset) const { return canonical(TreePoint{edge, offset}); }

  void validate(const point_type& p) const;
  double distance(const point_type& p, const point_type& q) const;
  point_type interp(const point_type& p, const point_type& q, double t) const;
  // Trees have no geodesic extension; returns b.
  point_type extrapolate(const point_type& x, const point_type& b, double w) const;
  point_type barycenter(std::span<const point_type> pts, std::span<const double> w, double tol = 1e-13,
                        const point_type* start = nullptr) const;
  point_type sample(std::mt19937_64& rng, double radius) const;
  bool equal(const point_type& p, const point_type& q, double tol = 1e-12) const;

  // Distance from a point to a vertex.
  double to_vertex(const TreePoint& p, int v) const;

 private:
  struct Data;
  std::shared_ptr<const Data> d_;
};

using SpaceDescriptor = std::variant<EuclideanSpace, HyperbolicPlane, SpdManifold, MetricTree>;
using Point = std::variant<Vector, std::complex<double>, Matrix, TreePoint>;

std::string space_name(const SpaceDescriptor& s);

template <class G>
concept Geometry = requires(const G& g, const typename G::point_type& p, double t) {
  { g.distance(p, p) } -> std::convertible_to<double>;
  { g.interp(p, p, t) } -> std::convertible_to<typename G::point_type>;
  { g.extrapolate(p, p, t) } -> std::convertible_to<typename G::point_type>;
};

// Weighted-mean validation shared by every barycenter. Iterative barycenters
// accept an optional starting point.
void validate_weights(std::size_t n_points, std::span<const double> w);

}  // namespace npch
