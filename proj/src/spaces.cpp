#include "npch/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>

#include "json.hpp"

#include "npch/errors.hpp"

namespace npch {

void validate_weights(std::size_t n_points, std::span<const double> w) {
  if (n_points == 0) throw DomainError("barycenter needs at least one point");
  if (w.size() != n_points) throw DomainError("barycenter: one weight per point required");
  double s = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw DomainError("barycenter: weights must be nonnegative");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-9) throw DomainError("barycenter: weights must sum to 1");
}

namespace {

void check_interp_parameter(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("interp: t must lie in [0,1]");
}

// Upper bound on the Hessian of x -> d^2(x,p)/2 at distance r when sectional
// curvature is >= -1; its reciprocal is a safe gradient step.
double hessian_bound(double r) { return r < 1e-8 ? 1.0 : r / std::tanh(r); }

}  // namespace

// ---------------------------------------------------------------------------
EuclideanSpace::EuclideanSpace(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidPoint("Euclidean dimension must be positive");
}

void EuclideanSpace::validate(const point_type& p) const {
  if (p.size() != dim_) throw InvalidPoint("Euclidean point has wrong dimension");
  if (!p.allFinite()) throw InvalidPoint("Euclidean point is not finite");
}

double EuclideanSpace::distance(const point_type& p, const point_type& q) const {
  if (p.size() != dim_ || q.size() != dim_) throw InvalidPoint("Euclidean point has wrong dimension");
  return (p - q).norm();
}

Vector EuclideanSpace::interp(const point_type& p, const point_type& q, double t) const {
  check_interp_parameter(t);
  return (1.0 - t) * p + t * q;
}

Vector EuclideanSpace::extrapolate(const point_type& x, const point_type& b, double w) const {
  return x + w * (b - x);
}

Vector EuclideanSpace::barycenter(std::span<const point_type> pts, std::span<const double> w, double,
                                  const point_type*) const {
  validate_weights(pts.size(), w);
  Vector m = Vector::Zero(dim_);
  for (std::size_t i = 0; i < pts.size(); ++i) m += w[i] * pts[i];
  return m;
}

Vector EuclideanSpace::sample(std::mt19937_64& rng, double radius) const {
  std::normal_distribution<double> g(0.0, radius / std::sqrt(static_cast<double>(dim_)));
  Vector p(dim_);
  for (int i = 0; i < dim_; ++i) p[i] = g(rng);
  return p;
}

bool EuclideanSpace::equal(const point_type& p, const point_type& q, double tol) const {
  return distance(p, q) <= tol;
}

// ---------------------------------------------------------------------------
void HyperbolicPlane::validate(const point_type& p) const {
  if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw InvalidPoint("disk point is not finite");
  if (!(std::abs(p) < kMaxModulus)) throw InvalidPoint("disk point outside the open unit disk");
}

double HyperbolicPlane::distance(const point_type& p, const point_type& q) const {
  // sinh(d/2) = |p-q| / sqrt((1-|p|^2)(1-|q|^2)); accurate for nearby points.
  const double ap = std::abs(p);
  const double aq = std::abs(q);
  const double denom = std::sqrt((1.0 - ap) * (1.0 + ap) * (1.0 - aq) * (1.0 + aq));
  return 2.0 * std::asinh(std::abs(p - q) / denom);
}

std::complex<double> HyperbolicPlane::log(const point_type& x, const point_type& q) const {
  const point_type w = (q - x) / (1.0 - std::conj(x) * q);
  const double a = std::abs(w);
  if (a == 0.0) return {0.0, 0.0};
  return w * (2.0 * std::atanh(std::min(a, kMaxModulus)) / a);
}

std::complex<double> HyperbolicPlane::exp(const point_type& x, const point_type& v) const {
  const double r = std::abs(v);
  if (r == 0.0) return x;
  const point_type z = v * (std::tanh(0.5 * r) / r);
  return (z + x) / (1.0 + std::conj(x) * z);
}

std::complex<double> HyperbolicPlane::interp(const point_type& p, const point_type& q, double t) const {
  check_interp_parameter(t);
  if (t == 0.0) return p;
  if (t == 1.0) return q;
  return exp(p, t * log(p, q));
}

std::complex<double> HyperbolicPlane::extrapolate(const point_type& x, const point_type& b, double w) const {
  return exp(x, w * log(x, b));
}

std::complex<double> HyperbolicPlane::barycenter(std::span<const point_type> pts, std::span<const double> w,
                                                 double tol, const point_type* start) const {
  validate_weights(pts.size(), w);
  point_type x = start ? *start : pts[static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin())];
  for (int it = 0; it < 200; ++it) {
    point_type grad{0.0, 0.0};
    double lip = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (w[i] == 0.0) continue;
      const point_type v = log(x, pts[i]);
      grad += w[i] * v;
      lip += w[i] * hessian_bound(std::abs(v));
    }
    if (std::abs(grad) <= tol) break;
    x = exp(x, grad / lip);
  }
  return x;
}

std::complex<double> HyperbolicPlane::from_polar(double r, double arg) {
  return std::polar(std::tanh(0.5 * r), arg);
}

std::complex<double> HyperbolicPlane::sample(std::mt19937_64& rng, double radius) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * u(rng);
  const double a = 2.0 * std::numbers::pi * u(rng);
  return from_polar(r, a);
}

bool HyperbolicPlane::equal(const point_type& p, const point_type& q, double tol) const {
  return distance(p, q) <= tol;
}

// ---------------------------------------------------------------------------
SpdManifold::SpdManifold(int n) : n_(n) {
  if (n < 2) throw InvalidPoint("SPD manifold dimension must be at least 2");
}

void SpdManifold::validate(const point_type& p) const {
  if (p.rows() != n_ || p.cols() != n_) throw InvalidPoint("SPD point has wrong dimension");
  validate_spd(p);
}

double SpdManifold::distance(const point_type& p, const point_type& q) const {
  if (p.rows() != n_ || q.rows() != n_) throw InvalidPoint("SPD point has wrong dimension");
  return spd_distance(p, q);
}

Matrix SpdManifold::interp(const point_type& p, const point_type& q, double t) const {
  check_interp_parameter(t);
  if (t == 0.0) return p;
  if (t == 1.0) return q;
  return spd_geodesic(p, q, t);
}

Matrix SpdManifold::extrapolate(const point_type& x, const point_type& b, double w) const {
  return spd_geodesic(x, b, w);
}

Matrix SpdManifold::barycenter(std::span<const point_type> pts, std::span<const double> w, double tol,
                               const point_type* start) const {
  validate_weights(pts.size(), w);
  Matrix x = start ? *start : pts[static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin())];
  for (int it = 0; it < 200; ++it) {
    const SymEig ex = sym_eig(x);
    const Matrix half = spectral_apply(ex, [](double v) { return std::sqrt(v); });
    const Matrix ihalf = spectral_apply(ex, [](double v) { return 1.0 / std::sqrt(v); });
    Matrix grad = Matrix::Zero(n_, n_);
    double lip = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (w[i] == 0.0) continue;
      const Matrix li = spd_log_identity(symmetrize(ihalf * pts[i] * ihalf));
      grad += w[i] * li;
      lip += w[i] * hessian_bound(li.norm());
    }
    if (grad.norm() <= tol) break;
    x = symmetrize(half * sym_exp(grad / lip) * half);
  }
  return x;
}

Matrix SpdManifold::sample(std::mt19937_64& rng, double radius) const {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix v(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) v(i, j) = v(j, i) = g(rng);
  v *= radius * u(rng) / std::max(v.norm(), 1e-300);
  return sym_exp(v);
}

bool SpdManifold::equal(const point_type& p, const point_type& q, double tol) const {
  return distance(p, q) <= tol;
}

// ---------------------------------------------------------------------------
struct MetricTree::Data {
  std::vector<std::string> names;
  std::vector<TreeEdge> edges;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, edge)
  std::vector<double> dist;                           // n x n
  std::vector<int> next;                              // n x n next hop
  std::vector<int> edge_of;                           // n x n edge id or -1
  int n = 0;
  double D(int a, int b) const { return dist[static_cast<std::size_t>(a * n + b)]; }
  int hop(int a, int b) const { return next[static_cast<std::size_t>(a * n + b)]; }
};

MetricTree::MetricTree(std::vector<std::string> vertex_names, std::vector<TreeEdge> edges) {
  auto d = std::make_shared<Data>();
  d->n = static_cast<int>(vertex_names.size());
  if (d->n < 1) throw InvalidPoint("metric tree needs at least one vertex");
  if (static_cast<int>(edges.size()) != d->n - 1) throw InvalidPoint("metric tree must have |V|-1 edges");
  d->names = std::move(vertex_names);
  d->edges = std::move(edges);
  const auto n = static_cast<std::size_t>(d->n);
  d->adj.assign(n, {});
  d->edge_of.assign(n * n, -1);
  for (int e = 0; e < static_cast<int>(d->edges.size()); ++e) {
    const TreeEdge& ed = d->edges[static_cast<std::size_t>(e)];
    if (ed.from < 0 || ed.to < 0 || ed.from >= d->n || ed.to >= d->n || ed.from == ed.to)
      throw InvalidPoint("metric tree edge has invalid endpoints");
    if (!(ed.length > 0.0) || !std::isfinite(ed.length)) throw InvalidPoint("metric tree edge length must be positive");
    d->adj[static_cast<std::size_t>(ed.from)].emplace_back(ed.to, e);
    d->adj[static_cast<std::size_t>(ed.to)].emplace_back(ed.from, e);
    d->edge_of[static_cast<std::size_t>(ed.from * d->n + ed.to)] = e;
    d->edge_of[static_cast<std::size_t>(ed.to * d->n + ed.from)] = e;
  }
  d->dist.assign(n * n, std::numeric_limits<double>::infinity());
  d->next.assign(n * n, -1);
  for (int s = 0; s < d->n; ++s) {
    // Tree: BFS from s gives unique paths; next hop from v toward s is the BFS parent.
    std::queue<int> q;
    d->dist[static_cast<std::size_t>(s * d->n + s)] = 0.0;
    d->next[static_cast<std::size_t>(s * d->n + s)] = s;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (auto [u, e] : d->adj[static_cast<std::size_t>(v)]) {
        double& du = d->dist[static_cast<std::size_t>(s * d->n + u)];
        if (std::isinf(du)) {
          du = d->D(s, v) + d->edges[static_cast<std::size_t>(e)].length;
          d->next[static_cast<std::size_t>(u * d->n + s)] = v;
          q.push(u);
        }
      }
    }
  }
  for (double x : d->dist)
    if (std::isinf(x)) throw InvalidPoint("metric tree is not connected");
  d_ = std::move(d);
}

MetricTree MetricTree::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidPoint(std::string("metric tree JSON: ") + e.what());
  }
  auto as_name = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw InvalidPoint("metric tree JSON: vertex ids must be strings or integers");
  };
  if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
    throw InvalidPoint("metric tree JSON needs \"vertices\" and \"edges\"");
  std::vector<std::string> names;
  std::map<std::string, int> index;
  for (const auto& v : j.at("vertices")) {
    std::string nm = as_name(v);
    if (index.count(nm)) throw InvalidPoint("metric tree JSON: duplicate vertex " + nm);
    index[nm] = static_cast<int>(names.size());
    names.push_back(nm);
  }
  std::vector<TreeEdge> edges;
  for (const auto& e : j.at("edges")) {
    const std::string a = as_name(e.at("from"));
    const std::string b = as_name(e.at("to"));
    if (!index.count(a) || !index.count(b)) throw InvalidPoint("metric tree JSON: edge refers to unknown vertex");
    edges.push_back({index[a], index[b], e.at("length").get<double>()});
  }
  return MetricTree(std::move(names), std::move(edges));
}

std::string MetricTree::to_json() const {
  nlohmann::ordered_json j;
  j["vertices"] = d_->names;
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : d_->edges)
    j["edges"].push_back({{"from", d_->names[static_cast<std::size_t>(e.from)]},
                          {"to", d_->names[static_cast<std::size_t>(e.to)]},
                          {"length", e.length}});
  return j.dump();
}

int MetricTree::vertex_count() const { return d_->n; }
int MetricTree::edge_count() const { return static_cast<int>(d_->edges.size()); }
const TreeEdge& MetricTree::edge(int id) const { return d_->edges.at(static_cast<std::size_t>(id)); }
const std::vector<std::string>& MetricTree::vertex_names() const { return d_->names; }
int MetricTree::degree(int v) const { return static_cast<int>(d_->adj.at(static_cast<std::size_t>(v)).size()); }
double MetricTree::vertex_distance(int a, int b) const { return d_->D(a, b); }
int MetricTree::edge_between(int a, int b) const { return d_->edge_of[static_cast<std::size_t>(a * d_->n + b)]; }

TreePoint MetricTree::vertex_point(int v) const {
  if (v < 0 || v >= d_->n) throw InvalidPoint("vertex index out of range");
  int best = -1;
  for (auto [u, e] : d_->adj[static_cast<std::size_t>(v)]) best = best < 0 ? e : std::min(best, e);
  if (best < 0) throw InvalidPoint("isolated vertex has no point representative");
  const TreeEdge& ed = d_->edges[static_cast<std::size_t>(best)];
  return TreePoint{best, ed.from == v ? 0.0 : ed.length};
}

int MetricTree::vertex_at(const TreePoint& p, double tol) const {
  const TreeEdge& ed = edge(p.edge);
  if (p.offset <= tol) return ed.from;
  if (p.offset >= ed.length - tol) return ed.to;
  return -1;
}

TreePoint MetricTree::canonical(const TreePoint& p) const {
  const TreeEdge& ed = edge(p.edge);
  const double off = std::clamp(p.offset, 0.0, ed.length);
  if (off <= 1e-12) return vertex_point(ed.from);
  if (off >= ed.length - 1e-12) return vertex_point(ed.to);
  return TreePoint{p.edge, off};
}

void MetricTree::validate(const point_type& p) const {
  if (p.edge < 0 || p.edge >= edge_count()) throw InvalidPoint("tree point refers to a missing edge");
  const double len = edge(p.edge).length;
  if (!(p.offset >= -1e-12 && p.offset <= len + 1e-12)) throw InvalidPoint("tree point offset outside its edge");
}

double MetricTree::to_vertex(const TreePoint& p, int v) const {
  const TreeEdge& ed = edge(p.edge);
  return std::min(p.offset + d_->D(ed.from, v), (ed.length - p.offset) + d_->D(ed.to, v));
}

namespace {

struct Route {
  int x;  // endpoint of p's edge the path leaves through
  int y;  // endpoint of q's edge the path enters through
  double dx;
  double dy;
  double length;
};

}  // namespace

double MetricTree::distance(const point_type& p, const point_type& q) const {
  validate(p);
  validate(q);
  if (p.edge == q.edge) return std::abs(p.offset - q.offset);
  const TreeEdge& ep = edge(p.edge);
  const TreeEdge& eq = edge(q.edge);
  const double px[2] = {p.offset, ep.length - p.offset};
  const double qy[2] = {q.offset, eq.length - q.offset};
  const int pv[2] = {ep.from, ep.to};
  const int qv[2] = {eq.from, eq.to};
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) best = std::min(best, px[a] + d_->D(pv[a], qv[b]) + qy[b]);
  return best;
}

TreePoint MetricTree::interp(const point_type& p, const point_type& q, double t) const {
  check_interp_parameter(t);
  validate(p);
  validate(q);
  if (p.edge == q.edge) return canonical(TreePoint{p.edge, p.offset + t * (q.offset - p.offset)});
  const TreeEdge& ep = edge(p.edge);
  const TreeEdge& eq = edge(q.edge);
  const double px[2] = {p.offset, ep.length - p.offset};
  const double qy[2] = {q.offset, eq.length - q.offset};
  const int pv[2] = {ep.from, ep.to};
  const int qv[2] = {eq.from, eq.to};
  Route r{-1, -1, 0, 0, std::numeric_limits<double>::infinity()};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double len = px[a] + d_->D(pv[a], qv[b]) + qy[b];
      if (len < r.length) r = Route{pv[a], qv[b], px[a], qy[b], len};
    }
  double s = t * r.length;
  if (s <= r.dx) return canonical(TreePoint{p.edge, r.x == ep.from ? p.offset - s : p.offset + s});
  s -= r.dx;
  int v = r.x;
  while (v != r.y) {
    const int nv = d_->hop(v, r.y);
    const int e = edge_between(v, nv);
    const TreeEdge& ed = edge(e);
    if (s <= ed.length) return canonical(TreePoint{e, ed.from == v ? s : ed.length - s});
    s -= ed.length;
    v = nv;
  }
  return canonical(TreePoint{q.edge, r.y == eq.from ? s : eq.length - s});
}

TreePoint MetricTree::extrapolate(const point_type&, const point_type& b, double) const { return b; }

TreePoint MetricTree::barycenter(std::span<const point_type> pts, std::span<const double> w, double,
                                 const point_type*) const {
  validate_weights(pts.size(), w);
  // Restricted to one edge the objective is sum_i w_i (s - c_i)^2 with c_i
  // the signed position of p_i along that edge's line; minimize per edge.
  double best_f = std::numeric_limits<double>::infinity();
  TreePoint best{};
  for (int e = 0; e < edge_count(); ++e) {
    const TreeEdge& ed = edge(e);
    std::vector<double> c(pts.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const TreePoint& p = pts[i];
      if (p.edge == e) {
        c[i] = p.offset;
      } else {
        const double da = to_vertex(p, ed.from);
        const double db = to_vertex(p, ed.to);
        c[i] = da <= db ? -da : ed.length + db;
      }
      mean += w[i] * c[i];
    }
    const double s = std::clamp(mean, 0.0, ed.length);
    double f = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) f += w[i] * (s - c[i]) * (s - c[i]);
    if (f < best_f - 1e-15) {
      best_f = f;
      best = TreePoint{e, s};
    }
  }
  return canonical(best);
}

TreePoint MetricTree::sample(std::mt19937_64& rng, double) const {
  if (edge_count() == 0) throw DomainError("cannot sample a tree without edges");
  double total = 0.0;
  for (const auto& e : d_->edges) total += e.length;
  std::uniform_real_distribution<double> u(0.0, total);
  double x = u(rng);
  for (int e = 0; e < edge_count(); ++e) {
    const double len = edge(e).length;
    if (x <= len || e + 1 == edge_count()) return canonical(TreePoint{e, std::min(x, len)});
    x -= len;
  }
  return vertex_point(0);
}

bool MetricTree::equal(const point_type& p, const point_type& q, double tol) const {
  return distance(p, q) <= tol;
}

std::string space_name(const SpaceDescriptor& s) {
  return std::visit([](const auto& g) { return std::string(std::decay_t<decltype(g)>::kName); }, s);
}

}  // namespace npch
