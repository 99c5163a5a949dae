#include "npch/npc_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npch/parallel.hpp"

namespace npch {

void validate_point(const SpaceDescriptor& space, const Point& p) {
  std::visit([&](const auto& g) { g.validate(point_as<std::decay_t<decltype(g)>>(p)); }, space);
}

double distance(const SpaceDescriptor& space, const Point& p, const Point& q) {
  return std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        return g.distance(point_as<G>(p), point_as<G>(q));
      },
      space);
}

Point interp(const SpaceDescriptor& space, const Point& p, const Point& q, double t) {
  return std::visit(
      [&](const auto& g) -> Point {
        using G = std::decay_t<decltype(g)>;
        return g.interp(point_as<G>(p), point_as<G>(q), t);
      },
      space);
}

Point barycenter(const SpaceDescriptor& space, std::span<const Point> pts, std::span<const double> weights,
                 double tol) {
  return std::visit(
      [&](const auto& g) -> Point {
        using G = std::decay_t<decltype(g)>;
        std::vector<typename G::point_type> raw;
        raw.reserve(pts.size());
        for (const Point& p : pts) raw.push_back(point_as<G>(p));
        return g.barycenter(raw, weights, tol);
      },
      space);
}

Point sample_point(const SpaceDescriptor& space, std::mt19937_64& rng, double radius) {
  return std::visit([&](const auto& g) -> Point { return g.sample(rng, radius); }, space);
}

double cat_kappa_slack(double kappa, double d_pq, double d_pr, double d_qr, double d_pqt, double t) {
  const double k = std::sqrt(kappa);
  const double lhs = std::cosh(k * d_pqt);
  double rhs;
  if (k * d_qr < 1e-8) {
    rhs = (1.0 - t) * std::cosh(k * d_pq) + t * std::cosh(k * d_pr);
  } else {
    rhs = (std::sinh((1.0 - t) * k * d_qr) * std::cosh(k * d_pq) + std::sinh(t * k * d_qr) * std::cosh(k * d_pr)) /
          std::sinh(k * d_qr);
  }
  return rhs - lhs;
}

namespace {

struct Sampled {
  double slack;
  std::array<Point, 4> pts;
  double t;
};

template <class Slack>
ComparisonReport run_comparison(const SpaceDescriptor& space, int samples, std::uint64_t seed, double radius,
                                Slack&& slack) {
  ComparisonReport rep;
  if (samples < 1) throw DomainError("comparison check needs at least one sample");
  if (const auto* tree = std::get_if<MetricTree>(&space); tree && tree->edge_count() == 0) return rep;

  std::vector<Sampled> out(static_cast<std::size_t>(samples));
  parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto rng = task_rng(seed, i);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      Point p = sample_point(space, rng, radius);
      Point q = sample_point(space, rng, radius);
      Point r = sample_point(space, rng, radius);
      const double t = u(rng);
      Point qt = interp(space, q, r, t);
      const double s = slack(distance(space, p, q), distance(space, p, r), distance(space, q, r),
                             distance(space, p, qt), t);
      out[i] = Sampled{s, {p, q, r, qt}, t};
    }
  });
  const auto worst = std::min_element(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.slack < b.slack;
  });
  rep.residual = worst->slack;
  rep.worst_case = worst->pts;
  rep.worst_t = worst->t;
  rep.samples = samples;
  return rep;
}

}  // namespace

ComparisonReport check_npc_inequality(const SpaceDescriptor& space, int samples, std::uint64_t seed, double radius) {
  return run_comparison(space, samples, seed, radius,
                        [](double pq, double pr, double qr, double pqt, double t) {
                          const double rhs = (1.0 - t) * pq * pq + t * pr * pr - t * (1.0 - t) * qr * qr;
                          return rhs - pqt * pqt;
                        });
}

ComparisonReport check_cat_kappa(const SpaceDescriptor& space, double kappa, int samples, std::uint64_t seed,
                                 double radius) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  if (std::holds_alternative<HyperbolicPlane>(space)) {
    if (kappa > 1.0 + 1e-15) throw UnsupportedSpace("the hyperbolic plane is only CAT(-kappa) for kappa <= 1");
  } else if (!std::holds_alternative<MetricTree>(space)) {
    throw UnsupportedSpace(space_name(space) + " has no negative upper curvature bound");
  }
  return run_comparison(space, samples, seed, radius,
                        [kappa](double pq, double pr, double qr, double pqt, double t) {
                          return cat_kappa_slack(kappa, pq, pr, qr, pqt, t);
                        });
}

}  // namespace npch
