#pragma once

// Space-agnostic entry points over SpaceDescriptor/Point, comparison checks,
// and the pairwise inductive mean.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "npch/errors.hpp"
#include "npch/spaces.hpp"

namespace npch {

// Unwraps a Point for a concrete geometry; InvalidPoint on mismatch.
template <Geometry G>
const typename G::point_type& point_as(const Point& p) {
  const auto* v = std::get_if<typename G::point_type>(&p);
  if (!v) throw InvalidPoint(std::string("point does not belong to space ") + G::kName);
  return *v;
}

void validate_point(const SpaceDescriptor& space, const Point& p);
double distance(const SpaceDescriptor& space, const Point& p, const Point& q);
Point interp(const SpaceDescriptor& space, const Point& p, const Point& q, double t);
Point barycenter(const SpaceDescriptor& space, std::span<const Point> pts, std::span<const double> weights,
                 double tol = 1e-12);
Point sample_point(const SpaceDescriptor& space, std::mt19937_64& rng, double radius);

// Weighted inductive mean: x_{k+1} = interp(x_k, p_{i(k)}, w_i / W_k) with i
// cycling through the points and W_k the accumulated weight. Stops when two
// consecutive full cycles end within tol of each other.
template <Geometry G>
typename G::point_type inductive_mean(const G& g, std::span<const typename G::point_type> pts,
                                      std::span<const double> w, double tol, int max_cycles = 100000) {
  validate_weights(pts.size(), w);
  typename G::point_type x = pts[0];
  double acc = 0.0;
  bool first = true;
  typename G::point_type prev = x;
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (w[i] == 0.0) continue;
      acc += w[i];
      if (first) {
        x = pts[i];
        first = false;
        continue;
      }
      x = g.interp(x, pts[i], w[i] / acc);
    }
    if (cycle > 0 && g.distance(prev, x) <= tol) return x;
    prev = x;
  }
  throw ConvergenceError("inductive mean did not converge", {});
}

struct ComparisonReport {
  double residual = 0.0;          // min over samples of RHS - LHS
  std::array<Point, 4> worst_case;  // P, Q, R, Q_t
  double worst_t = 0.0;
  int samples = 0;
};

ComparisonReport check_npc_inequality(const SpaceDescriptor& space, int samples, std::uint64_t seed,
                                      double radius = 2.0);

// Hyperbolic comparison with curvature -kappa. H2 (kappa <= 1) and trees only.
ComparisonReport check_cat_kappa(const SpaceDescriptor& space, double kappa, int samples, std::uint64_t seed,
                                 double radius = 2.0);

// RHS - LHS of the curvature -kappa comparison for one configuration.
double cat_kappa_slack(double kappa, double d_pq, double d_pr, double d_qr, double d_pqt, double t);

}  // namespace npch
