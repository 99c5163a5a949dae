#include "npch/isometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "npch/errors.hpp"
#include "npch/npc_core.hpp"

namespace npch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cd = std::complex<double>;

double distance_from_identity(const Matrix& x) {
  const SymEig e = sym_eig(symmetrize(x));
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (!(e.values[i] > 0.0)) throw InvalidPoint("matrix is not positive definite");
    const double l = std::log(e.values[i]);
    s += l * l;
  }
  return std::sqrt(s);
}

Matrix scale_conjugate(const Matrix& m, const Vector& v, double t) {
  Matrix n = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (n(i, j) != 0.0) n(i, j) *= std::exp(-0.5 * t * (v[i] - v[j]));
  return n;
}

double frame_displacement(const Matrix& m, const Vector& v, double t) {
  const Matrix n = scale_conjugate(m, v, t);
  return distance_from_identity(n * n.transpose());
}

Matrix diag_exp(const Vector& v, double t) { return (t * v).array().exp().matrix().asDiagonal(); }

double commutator_norm(const Matrix& a, const Matrix& b) { return (a * b - b * a).norm(); }

Matrix matrix_power(const Matrix& g, long k) {
  Matrix base = k >= 0 ? g : Matrix(g.inverse());
  unsigned long e = static_cast<unsigned long>(k >= 0 ? k : -k);
  Matrix out = Matrix::Identity(g.rows(), g.cols());
  while (e) {
    if (e & 1UL) out = out * base;
    base = base * base;
    e >>= 1UL;
  }
  return out;
}

// Real basis in which m is block diagonal with 1x1 real blocks and 2x2
// scaled rotations [[a, b], [-b, a]].
struct RealBlocks {
  Matrix basis;
  std::vector<int> start;
  std::vector<int> size;
};

RealBlocks real_block_basis(const Matrix& m) {
  const Eigen::Index n = m.rows();
  Eigen::EigenSolver<Matrix> es(m, true);
  if (es.info() != Eigen::Success) throw DomainError("eigen decomposition failed");
  const Eigen::VectorXcd lam = es.eigenvalues();
  const Eigen::MatrixXcd vec = es.eigenvectors();
  RealBlocks rb;
  rb.basis = Matrix::Zero(n, n);
  int col = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double im = lam[k].imag();
    const double tol = 1e-12 * std::max(1.0, std::abs(lam[k]));
    if (std::abs(im) <= tol) {
      Vector v = vec.col(k).real();
      if (v.norm() < 1e-300) v = vec.col(k).imag();
      rb.basis.col(col) = v.normalized();
      rb.start.push_back(col);
      rb.size.push_back(1);
      ++col;
    } else if (im > 0.0) {
      if (col + 2 > n) throw DomainError("unpaired complex eigenvalue");
      Vector u = vec.col(k).real();
      Vector w = vec.col(k).imag();
      const double s = std::sqrt(u.squaredNorm() + w.squaredNorm());
      rb.basis.col(col) = u / s;
      rb.basis.col(col + 1) = w / s;
      rb.start.push_back(col);
      rb.size.push_back(2);
      col += 2;
    }
  }
  if (col != n) throw DomainError("could not pair complex eigenvalues");
  return rb;
}

// Squared modulus of the eigenvalue carried by a diagonal block.
double block_modulus_sq(const Matrix& m, int s, int size) {
  if (size == 1) return m(s, s) * m(s, s);
  const Eigen::Matrix2d b = m.block(s, s, 2, 2);
  return std::abs(b.determinant());
}

bool in_same_block(const std::vector<int>& start, const std::vector<int>& size, Eigen::Index i, Eigen::Index j) {
  for (std::size_t k = 0; k < start.size(); ++k) {
    const bool a = i >= start[k] && i < start[k] + size[k];
    const bool b = j >= start[k] && j < start[k] + size[k];
    if (a || b) return a && b;
  }
  return false;
}

Vector grouped_direction(const std::vector<int>& start, const std::vector<int>& size, const Vector& logs) {
  const std::size_t nb = start.size();
  std::vector<double> lb(nb);
  for (std::size_t k = 0; k < nb; ++k) lb[k] = logs[start[k]];
  double c = 1.0;
  for (std::size_t k = 0; k + 1 < nb; ++k) c = std::max(c, 1.0 + lb[k + 1] - lb[k]);
  Vector v(logs.size());
  for (std::size_t k = 0; k < nb; ++k) {
    const double val = lb[k] + c * (0.5 * static_cast<double>(nb - 1) - static_cast<double>(k));
    for (int i = 0; i < size[k]; ++i) v[start[k] + i] = val;
  }
  return v;
}

void check_invertible(const Matrix& g) {
  if (g.rows() != g.cols() || g.rows() < 1) throw DomainError("matrix must be square");
  if (!g.allFinite()) throw DomainError("matrix is not finite");
  if (!(std::abs(g.determinant()) > 1e-12)) throw DomainError("matrix is singular");
}

}  // namespace

std::string to_string(IsometryClass c) {
  switch (c) {
    case IsometryClass::elliptic: return "elliptic";
    case IsometryClass::hyperbolic: return "hyperbolic";
    case IsometryClass::parabolic: return "parabolic";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
EuclideanMotion::EuclideanMotion(Matrix r, Vector s) : rotation(std::move(r)), shift(std::move(s)) {
  if (rotation.rows() != rotation.cols() || rotation.rows() != shift.size() || shift.size() < 1)
    throw InvalidPoint("Euclidean motion has inconsistent dimensions");
  const Matrix defect = rotation.transpose() * rotation - Matrix::Identity(rotation.rows(), rotation.cols());
  if (defect.cwiseAbs().maxCoeff() > 1e-10) throw InvalidPoint("Euclidean motion needs an orthogonal linear part");
}

EuclideanMotion EuclideanMotion::inverse() const {
  return EuclideanMotion(rotation.transpose(), -(rotation.transpose() * shift));
}

MobiusMap::MobiusMap(const Eigen::Matrix2d& m) : sl2(m) {
  if (!m.allFinite()) throw InvalidPoint("Mobius matrix is not finite");
  const double det = m.determinant();
  if (!(det > 1e-12)) throw InvalidPoint("Mobius matrix needs positive determinant");
  sl2 /= std::sqrt(det);
}

std::complex<double> half_plane_to_disk(cd z) { return (z - cd(0, 1)) / (z + cd(0, 1)); }
std::complex<double> disk_to_half_plane(cd w) { return cd(0, 1) * (1.0 + w) / (1.0 - w); }

std::complex<double> MobiusMap::apply(cd w) const {
  // Conjugate of sl2 by the Cayley transform, applied directly in the disk.
  const double a = sl2(0, 0), b = sl2(0, 1), c = sl2(1, 0), d = sl2(1, 1);
  const cd alpha(0.5 * (a + d), 0.5 * (b - c));
  const cd beta(0.5 * (a - d), -0.5 * (b + c));
  return (alpha * w + beta) / (std::conj(beta) * w + std::conj(alpha));
}

MobiusMap MobiusMap::inverse() const {
  Eigen::Matrix2d inv;
  inv << sl2(1, 1), -sl2(0, 1), -sl2(1, 0), sl2(0, 0);
  return MobiusMap(inv);
}

SpdIsometry::SpdIsometry(Matrix m) : g(std::move(m)) { validate_group_element(g); }

SpdIsometry SpdIsometry::inverse() const { return SpdIsometry(g.inverse()); }

TreeAutomorphism::TreeAutomorphism(MetricTree t, std::vector<int> p) : tree(std::move(t)), perm(std::move(p)) {
  const int n = tree.vertex_count();
  if (static_cast<int>(perm.size()) != n) throw InvalidPoint("tree automorphism must permute every vertex");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v : perm) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) throw InvalidPoint("tree automorphism is not a bijection");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  for (int e = 0; e < tree.edge_count(); ++e) {
    const TreeEdge& ed = tree.edge(e);
    const int img = tree.edge_between(perm[static_cast<std::size_t>(ed.from)], perm[static_cast<std::size_t>(ed.to)]);
    if (img < 0 || std::abs(tree.edge(img).length - ed.length) > 1e-12)
      throw InvalidPoint("vertex permutation is not a tree isometry");
  }
}

TreePoint TreeAutomorphism::apply(const TreePoint& p) const {
  tree.validate(p);
  const TreeEdge& ed = tree.edge(p.edge);
  const int a = perm[static_cast<std::size_t>(ed.from)];
  const int img = tree.edge_between(a, perm[static_cast<std::size_t>(ed.to)]);
  const TreeEdge& ei = tree.edge(img);
  return tree.on_edge(img, ei.from == a ? p.offset : ei.length - p.offset);
}

TreeAutomorphism TreeAutomorphism::inverse() const {
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  return TreeAutomorphism(tree, std::move(inv));
}

SpaceDescriptor space_of(const IsometryDescriptor& iso) {
  return std::visit(
      [](const auto& m) -> SpaceDescriptor {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EuclideanMotion>) return EuclideanSpace(static_cast<int>(m.shift.size()));
        else if constexpr (std::is_same_v<T, MobiusMap>) return HyperbolicPlane{};
        else if constexpr (std::is_same_v<T, SpdIsometry>) return SpdManifold(static_cast<int>(m.g.rows()));
        else return m.tree;
      },
      iso);
}

Point apply_isometry(const IsometryDescriptor& iso, const Point& p) {
  return std::visit(
      [&](const auto& m) -> Point {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EuclideanMotion>) return m.apply(point_as<EuclideanSpace>(p));
        else if constexpr (std::is_same_v<T, MobiusMap>) return m.apply(point_as<HyperbolicPlane>(p));
        else if constexpr (std::is_same_v<T, SpdIsometry>) return m.apply(point_as<SpdManifold>(p));
        else return m.apply(point_as<MetricTree>(p));
      },
      iso);
}

// ---------------------------------------------------------------------------
double translation_length_lower_bound(const Matrix& g) {
  check_invertible(g);
  const Eigen::VectorXcd lam = Eigen::EigenSolver<Matrix>(g, false).eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double l = std::log(std::norm(lam[i]));
    s += l * l;
  }
  return std::sqrt(s);
}

bool is_semisimple(const Matrix& g, double condition_threshold) {
  check_invertible(g);
  Eigen::EigenSolver<Matrix> es(g, true);
  if (es.info() != Eigen::Success) return false;
  Eigen::MatrixXcd v = es.eigenvectors();
  for (Eigen::Index k = 0; k < v.cols(); ++k) v.col(k).normalize();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(v).singularValues();
  const double smin = sv[sv.size() - 1];
  return smin > 0.0 && sv[0] / smin < condition_threshold;
}

namespace {

bool near_plus_minus_identity(const Eigen::Matrix2d& m, double tol) {
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  return (m - id).cwiseAbs().maxCoeff() <= tol || (m + id).cwiseAbs().maxCoeff() <= tol;
}

IsometryClass classify_mobius(const MobiusMap& m, double tol) {
  if (near_plus_minus_identity(m.sl2, tol)) return IsometryClass::elliptic;
  const double tr = std::abs(m.trace());
  if (std::abs(tr - 2.0) <= tol) return IsometryClass::parabolic;
  return tr < 2.0 ? IsometryClass::elliptic : IsometryClass::hyperbolic;
}

double euclidean_axis_shift(const EuclideanMotion& m) {
  const Eigen::Index n = m.rotation.rows();
  Eigen::JacobiSVD<Matrix> svd(m.rotation - Matrix::Identity(n, n), Eigen::ComputeFullV);
  double s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (svd.singularValues()[k] <= 1e-10) {
      const double c = svd.matrixV().col(k).dot(m.shift);
      s += c * c;
    }
  }
  return std::sqrt(s);
}

}  // namespace

IsometryClass classify_isometry(const IsometryDescriptor& iso, const ClassifyOptions& opt) {
  return std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EuclideanMotion>) {
          return euclidean_axis_shift(m) > opt.zero_tol ? IsometryClass::hyperbolic : IsometryClass::elliptic;
        } else if constexpr (std::is_same_v<T, MobiusMap>) {
          return classify_mobius(m, opt.zero_tol);
        } else if constexpr (std::is_same_v<T, SpdIsometry>) {
          if (!is_semisimple(m.g, opt.condition_threshold)) return IsometryClass::parabolic;
          return translation_length_lower_bound(m.g) > opt.zero_tol ? IsometryClass::hyperbolic
                                                                    : IsometryClass::elliptic;
        } else {
          return IsometryClass::elliptic;
        }
      },
      iso);
}

double translation_length(const IsometryDescriptor& iso) {
  return std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EuclideanMotion>) {
          return euclidean_axis_shift(m);
        } else if constexpr (std::is_same_v<T, MobiusMap>) {
          const double tr = std::abs(m.trace());
          return tr > 2.0 ? 2.0 * std::acosh(0.5 * tr) : 0.0;
        } else if constexpr (std::is_same_v<T, SpdIsometry>) {
          return translation_length_lower_bound(m.g);
        } else {
          return 0.0;
        }
      },
      iso);
}

// ---------------------------------------------------------------------------
Iwasawa iwasawa(const Matrix& g) {
  check_invertible(g);
  const Eigen::Index n = g.rows();
  Matrix q = g;
  Matrix r = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // Modified Gram-Schmidt with one reorthogonalization pass.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = q.col(i).dot(q.col(j));
        r(i, j) += c;
        q.col(j) -= c * q.col(i);
      }
    }
    const double nrm = q.col(j).norm();
    if (!(nrm > 1e-14 * std::max(1.0, g.norm()))) throw DomainError("iwasawa: columns are linearly dependent");
    r(j, j) = nrm;
    q.col(j) /= nrm;
  }
  Iwasawa out;
  out.O = q;
  out.A = r.diagonal().asDiagonal();
  out.N = r.diagonal().cwiseInverse().asDiagonal() * r;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.N(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) out.N(i, j) = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> d, const FitOptions& opt) {
  const std::vector<double> tv(t.begin(), t.end());
  const std::vector<double> dv(d.begin(), d.end());
  if (t.size() != d.size()) throw FitError("time and value series differ in length", tv, dv);
  if (d.size() < 8) throw FitError("decay fit needs at least 8 samples", tv, dv);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!std::isfinite(d[i]) || !std::isfinite(t[i]) || d[i] < 0.0)
      throw FitError("series must be finite and nonnegative", tv, dv);

  const std::size_t n = d.size();
  const auto tail_n = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(opt.tail_fraction * n)));
  const std::size_t s = n - std::min(n, tail_n);
  DecayFit fit;
  fit.tail_start = t[s];
  fit.tail_points = static_cast<int>(n - s);

  const auto tail = d.subspan(s);
  const double lo = *std::min_element(tail.begin(), tail.end());
  const double hi = *std::max_element(tail.begin(), tail.end());
  if (hi == 0.0) return fit;  // fixed along the ray

  for (std::size_t i = s; i + 1 < n; ++i)
    if (d[i + 1] > d[i] + opt.monotone_tol * (1.0 + d[i]))
      throw FitError("displacement tail is not non-increasing", tv, dv);

  if (hi - lo <= 1e-12 * (1.0 + hi)) {
    fit.delta = lo;
    fit.classification = lo > 1e-10 ? IsometryClass::hyperbolic : IsometryClass::elliptic;
    return fit;
  }

  struct Line {
    double slope, intercept, r2;
  };
  auto regress = [&](double delta) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double m = static_cast<double>(tail.size());
    std::vector<double> y(tail.size());
    for (std::size_t i = 0; i < tail.size(); ++i) {
      y[i] = std::log(std::max(tail[i] - delta, 0.0) + opt.eps_floor);
      const double ti = t[s + i];
      st += ti;
      sy += y[i];
      stt += ti * ti;
      sty += ti * y[i];
    }
    const double den = m * stt - st * st;
    const double slope = (m * sty - st * sy) / den;
    const double icpt = (sy - slope * st) / m;
    const double ybar = sy / m;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < tail.size(); ++i) {
      const double r = y[i] - (icpt + slope * t[s + i]);
      ss_res += r * r;
      ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    return Line{slope, icpt, ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0};
  };

  // Delta in [0, lo]: scan offsets lo*(1 - 10^-u), then golden-section refine.
  double best = 0.0;
  double best_r2 = regress(0.0).r2;
  std::vector<double> cand{0.0};
  for (int k = 1; k <= 160; ++k) cand.push_back(lo * (1.0 - std::pow(10.0, -0.1 * k)));
  std::size_t best_k = 0;
  for (std::size_t k = 1; k < cand.size(); ++k) {
    const double r2 = regress(cand[k]).r2;
    if (r2 > best_r2) {
      best_r2 = r2;
      best = cand[k];
      best_k = k;
    }
  }
  double a = cand[best_k == 0 ? 0 : best_k - 1];
  double b = cand[std::min(best_k + 1, cand.size() - 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80 && b - a > 1e-15 * (1.0 + lo); ++it) {
    const double x1 = b - phi * (b - a);
    const double x2 = a + phi * (b - a);
    if (regress(x1).r2 >= regress(x2).r2) b = x2;
    else a = x1;
  }
  const double mid = 0.5 * (a + b);
  if (regress(mid).r2 > best_r2) best = mid;

  const Line line = regress(best);
  if (!(line.slope < 0.0)) throw FitError("displacement does not decay", tv, dv);
  fit.delta = best;
  fit.a = -line.slope;
  fit.b = std::exp(line.intercept);
  fit.r_squared = line.r2;
  fit.classification = IsometryClass::parabolic;
  return fit;
}

// ---------------------------------------------------------------------------
Matrix SpdDecayRay::point(double t) const {
  return symmetrize(frame * diag_exp(direction, t) * frame.transpose());
}

Matrix SpdDecayRay::conjugated(double t) const { return scale_conjugate(generator, direction, t); }

double SpdDecayRay::displacement(double t) const { return frame_displacement(generator, direction, t); }

SpdDecayRay spd_decay_ray(const Matrix& g, const ClassifyOptions& opt) {
  check_invertible(g);
  const Eigen::Index n = g.rows();
  SpdDecayRay ray;
  ray.g = g;
  std::vector<int> size;
  if (is_semisimple(g, opt.condition_threshold)) {
    const RealBlocks rb = real_block_basis(g);
    ray.frame = rb.basis;
    ray.block_start = rb.start;
    size = rb.size;
    ray.generator = ray.frame.lu().solve(g * ray.frame);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (!in_same_block(rb.start, rb.size, i, j)) ray.generator(i, j) = 0.0;
    Vector logs(n);
    for (std::size_t k = 0; k < rb.start.size(); ++k) {
      const double l = std::log(block_modulus_sq(ray.generator, rb.start[k], rb.size[k]));
      for (int i = 0; i < rb.size[k]; ++i) logs[rb.start[k] + i] = l;
    }
    ray.classification = logs.norm() > opt.zero_tol ? IsometryClass::hyperbolic : IsometryClass::elliptic;
    ray.direction = ray.classification == IsometryClass::hyperbolic ? logs : grouped_direction(rb.start, rb.size, Vector::Zero(n));
  } else {
    Eigen::RealSchur<Matrix> rs(g);
    if (rs.info() != Eigen::Success) throw DomainError("real Schur decomposition failed");
    const Matrix q = rs.matrixU();
    const Matrix tri = rs.matrixT();
    Matrix m = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n;) {
      if (i + 1 < n && tri(i + 1, i) != 0.0) {
        // Complex pair: rotate the 2x2 block into scaled-rotation form.
        const Eigen::Matrix2d b = tri.block(i, i, 2, 2);
        Eigen::EigenSolver<Eigen::Matrix2d> es(b, true);
        Eigen::Vector2cd v = es.eigenvalues()[0].imag() > 0 ? es.eigenvectors().col(0) : es.eigenvectors().col(1);
        m.block(i, i, 2, 1) = v.real();
        m.block(i, i + 1, 2, 1) = v.imag();
        ray.block_start.push_back(static_cast<int>(i));
        size.push_back(2);
        i += 2;
      } else {
        ray.block_start.push_back(static_cast<int>(i));
        size.push_back(1);
        i += 1;
      }
    }
    ray.frame = q * m;
    ray.generator = ray.frame.lu().solve(g * ray.frame);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < i; ++j)
        if (!in_same_block(ray.block_start, size, i, j)) ray.generator(i, j) = 0.0;
    Vector logs(n);
    for (std::size_t k = 0; k < ray.block_start.size(); ++k) {
      const double l = std::log(block_modulus_sq(ray.generator, ray.block_start[k], size[k]));
      for (int i = 0; i < size[k]; ++i) logs[ray.block_start[k] + i] = l;
    }
    ray.direction = grouped_direction(ray.block_start, size, logs);
    ray.classification = IsometryClass::parabolic;
  }
  const double nv = ray.direction.norm();
  if (nv > 0.0) ray.direction /= nv;
  return ray;
}

// ---------------------------------------------------------------------------
namespace {

cd mobius_half_plane(const Eigen::Matrix2d& m, cd z) { return (m(0, 0) * z + m(0, 1)) / (m(1, 0) * z + m(1, 1)); }

double half_plane_distance(cd z, cd w) {
  return 2.0 * std::asinh(std::abs(z - w) / (2.0 * std::sqrt(z.imag() * w.imag())));
}

}  // namespace

std::complex<double> DiskDecayRay::point(double t) const {
  const cd z = degenerate ? cd(0, 1) : cd(0, std::exp(t));
  return half_plane_to_disk(mobius_half_plane(frame, z));
}

double DiskDecayRay::displacement(double t) const {
  const cd z = degenerate ? cd(0, 1) : cd(0, std::exp(t));
  return half_plane_distance(z, mobius_half_plane(generator, z));
}

DiskDecayRay disk_decay_ray(const MobiusMap& m, const ClassifyOptions& opt) {
  const double a = m.sl2(0, 0), b = m.sl2(0, 1), c = m.sl2(1, 0), d = m.sl2(1, 1);
  DiskDecayRay ray{m, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity(), classify_mobius(m, opt.zero_tol),
                   false};
  const double scale = std::max(1.0, m.sl2.cwiseAbs().maxCoeff());
  const bool c_zero = std::abs(c) <= 1e-14 * scale;
  Eigen::Matrix2d f = Eigen::Matrix2d::Identity();
  switch (ray.classification) {
    case IsometryClass::parabolic:
      if (!c_zero) {
        const double xi = (a - d) / (2.0 * c);
        f << xi, -1.0, 1.0, 0.0;
      }
      break;
    case IsometryClass::hyperbolic:
      if (c_zero) {
        f << 1.0, b / (d - a), 0.0, 1.0;
      } else {
        const double disc = std::sqrt((a - d) * (a - d) + 4.0 * b * c);
        double x1 = ((a - d) + disc) / (2.0 * c);
        double x2 = ((a - d) - disc) / (2.0 * c);
        if (x1 < x2) std::swap(x1, x2);
        f << x1, x2, 1.0, 1.0;
        f /= std::sqrt(x1 - x2);
      }
      break;
    case IsometryClass::elliptic: {
      ray.degenerate = true;
      if (near_plus_minus_identity(m.sl2, opt.zero_tol)) break;
      const double tr = a + d;
      const cd z = (cd(a - d, 0) + cd(0, std::sqrt(std::max(0.0, 4.0 - tr * tr)))) / (2.0 * c);
      const cd fix = z.imag() > 0 ? z : std::conj(z);
      const double sy = std::sqrt(fix.imag());
      f << sy, fix.real() / sy, 0.0, 1.0 / sy;
      break;
    }
  }
  ray.frame = f;
  ray.generator = f.inverse() * m.sl2 * f;
  return ray;
}

// ---------------------------------------------------------------------------
std::vector<double> sample_times(double tmin, double tmax, int steps) {
  if (steps < 1 || !(tmax > tmin)) throw DomainError("sample_times needs tmax > tmin and steps >= 1");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = tmin + (tmax - tmin) * i / steps;
  return t;
}

RaySeries analyze_ray(const std::function<double(double)>& displacement, double tmin, double tmax, int steps,
                      const FitOptions& opt) {
  RaySeries out;
  out.t = sample_times(tmin, tmax, steps);
  out.displacement.reserve(out.t.size());
  for (double t : out.t) out.displacement.push_back(displacement(t));
  out.fit = fit_exponential_decay(out.t, out.displacement, opt);
  return out;
}

RaySeries decay_ray(const SpdDecayRay& ray, double tmin, double tmax, int steps, const FitOptions& opt) {
  return analyze_ray([&](double t) { return ray.displacement(t); }, tmin, tmax, steps, opt);
}

RaySeries decay_ray(const DiskDecayRay& ray, double tmin, double tmax, int steps, const FitOptions& opt) {
  return analyze_ray([&](double t) { return ray.displacement(t); }, tmin, tmax, steps, opt);
}

std::vector<double> measure_displacement(const IsometryDescriptor& iso, std::span<const Point> ray_points) {
  const SpaceDescriptor space = space_of(iso);
  std::vector<double> out;
  out.reserve(ray_points.size());
  for (const Point& p : ray_points) out.push_back(distance(space, p, apply_isometry(iso, p)));
  return out;
}

// ---------------------------------------------------------------------------
namespace {

Matrix sym_from_coords(const Vector& x, Eigen::Index n) {
  Matrix s(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      s(i, j) = s(j, i) = (i == j) ? x[k] : x[k] / std::numbers::sqrt2;
      ++k;
    }
  return s;
}

Vector nelder_mead(const std::function<double(const Vector&)>& f, Vector x0, double step, int max_iter) {
  const Eigen::Index k = x0.size();
  std::vector<Vector> simplex{x0};
  for (Eigen::Index i = 0; i < k; ++i) {
    Vector v = x0;
    v[i] += step;
    simplex.push_back(v);
  }
  std::vector<double> fv;
  for (const auto& v : simplex) fv.push_back(f(v));
  std::vector<std::size_t> idx(simplex.size());
  for (int it = 0; it < max_iter; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t lo = idx.front(), hi = idx.back(), nh = idx[idx.size() - 2];
    if (fv[hi] - fv[lo] <= 1e-14 * (1.0 + std::abs(fv[lo]))) {
      double spread = 0.0;
      for (const auto& v : simplex) spread = std::max(spread, (v - simplex[lo]).norm());
      if (spread < 1e-9) break;
    }
    Vector centroid = Vector::Zero(k);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != hi) centroid += simplex[i];
    centroid /= static_cast<double>(k);
    const Vector xr = centroid + (centroid - simplex[hi]);
    const double fr = f(xr);
    if (fr < fv[lo]) {
      const Vector xe = centroid + 2.0 * (centroid - simplex[hi]);
      const double fe = f(xe);
      if (fe < fr) simplex[hi] = xe, fv[hi] = fe;
      else simplex[hi] = xr, fv[hi] = fr;
    } else if (fr < fv[nh]) {
      simplex[hi] = xr, fv[hi] = fr;
    } else {
      const Vector xc = centroid + 0.5 * (simplex[hi] - centroid);
      const double fc = f(xc);
      if (fc < fv[hi]) {
        simplex[hi] = xc, fv[hi] = fc;
      } else {
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (i == lo) continue;
          simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
  return simplex[static_cast<std::size_t>(best)];
}

}  // namespace

DisplacementMinimum minimize_displacement(const Matrix& g, int grid, double grid_radius, double radius_cap) {
  check_invertible(g);
  const Eigen::Index n = g.rows();
  const Eigen::Index k = n * (n + 1) / 2;
  auto f = [&](const Vector& x) {
    if (x.norm() > radius_cap) return std::numeric_limits<double>::infinity();
    try {
      const Matrix p = sym_exp(sym_from_coords(x, n));
      return spd_distance(p, group_action(g, p));
    } catch (const InvalidPoint&) {
      // Far along a parabolic ray the points lose definiteness numerically.
      return std::numeric_limits<double>::infinity();
    }
  };
  Vector best = Vector::Zero(k);
  double fbest = f(best);
  const double total = std::pow(static_cast<double>(grid), static_cast<double>(k));
  if (grid >= 2 && total <= 20000.0) {
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    for (long c = 0; c < static_cast<long>(total); ++c) {
      long r = c;
      Vector x(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        x[i] = -grid_radius + 2.0 * grid_radius * static_cast<double>(r % grid) / (grid - 1);
        r /= grid;
      }
      const double v = f(x);
      if (v < fbest) fbest = v, best = x;
    }
  }
  for (int restart = 0; restart < 3; ++restart) best = nelder_mead(f, best, 0.25 / (1 << restart), 20000);
  return {f(best), sym_exp(sym_from_coords(best, n))};
}

double min_energy_constant(double delta) {
  if (!(delta >= 0.0)) throw DomainError("translation length must be nonnegative");
  return delta * delta / kTwoPi;
}

double min_energy_constant(const IsometryDescriptor& iso) { return min_energy_constant(translation_length(iso)); }

double spd_norm_sq(const Matrix& p, const Matrix& v) {
  const Matrix ih = spd_inv_sqrt(p);
  return (ih * v * ih).squaredNorm();
}

// ---------------------------------------------------------------------------
Matrix FlatTorusMap::operator()(double x, double y) const {
  const Vector e = (x * log1 + y * log2) / kTwoPi;
  return symmetrize(frame * e.array().exp().matrix().asDiagonal() * frame.transpose());
}

FlatTorusMap flat_torus_map(const Matrix& g1, const Matrix& g2, const ClassifyOptions& opt) {
  check_invertible(g1);
  check_invertible(g2);
  if (g1.rows() != g2.rows()) throw DomainError("torus generators differ in dimension");
  const double scale = std::max({1.0, g1.norm(), g2.norm()});
  if (commutator_norm(g1, g2) > 1e-10 * scale * scale) throw DomainError("torus generators do not commute");
  if (!is_semisimple(g1, opt.condition_threshold) || !is_semisimple(g2, opt.condition_threshold))
    throw DomainError("flat torus needs semisimple generators");

  // A generic combination separates the joint eigenspaces.
  const Matrix h = g1 + 0.7548776662466927 * g2;
  const RealBlocks rb = real_block_basis(h);
  const Eigen::Index n = g1.rows();
  auto lu = rb.basis.lu();
  FlatTorusMap out;
  out.frame = rb.basis;
  out.g1 = g1;
  out.g2 = g2;
  Vector logs[2] = {Vector(n), Vector(n)};
  const Matrix* gs[2] = {&g1, &g2};
  for (int w = 0; w < 2; ++w) {
    const Matrix b = lu.solve(*gs[w] * rb.basis);
    const double bs = std::max(1.0, b.norm());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (!in_same_block(rb.start, rb.size, i, j) && std::abs(b(i, j)) > 1e-8 * bs)
          throw DomainError("torus generators are not simultaneously diagonalizable");
    for (std::size_t k = 0; k < rb.start.size(); ++k) {
      const int s = rb.start[k];
      if (rb.size[k] == 2 && (std::abs(b(s, s) - b(s + 1, s + 1)) > 1e-8 * bs ||
                              std::abs(b(s, s + 1) + b(s + 1, s)) > 1e-8 * bs))
        throw DomainError("torus generators are not simultaneously diagonalizable");
      const double l = std::log(block_modulus_sq(b, s, rb.size[k]));
      for (int i = 0; i < rb.size[k]; ++i) logs[w][s + i] = l;
    }
  }
  out.log1 = logs[0];
  out.log2 = logs[1];
  out.delta1 = out.log1.norm();
  out.delta2 = out.log2.norm();
  return out;
}

Matrix AlmostFlatTorusMap::in_frame(double t, double x, double y) const {
  const double kx = std::floor(x / kTwoPi);
  const double ky = std::floor(y / kTwoPi);
  const double x0 = (x - kTwoPi * kx) / kTwoPi;
  const double y0 = (y - kTwoPi * ky) / kTwoPi;
  const Matrix& m1 = ray.generator;
  const Matrix& m2 = generator2;
  const Matrix c = diag_exp(ray.direction, t);
  const Matrix bottom = x0 == 0.0 ? c : spd_geodesic(c, group_action(m1, c), x0);
  const Matrix top = group_action(m2, bottom);
  const Matrix v = y0 == 0.0 ? bottom : spd_geodesic(bottom, top, y0);
  const Matrix shift = matrix_power(m1, static_cast<long>(kx)) * matrix_power(m2, static_cast<long>(ky));
  return group_action(shift, v);
}

Matrix AlmostFlatTorusMap::operator()(double t, double x, double y) const {
  return group_action(ray.frame, in_frame(t, x, y));
}

AlmostFlatTorusMap almost_flat_torus_map(const Matrix& g1, const Matrix& g2, double fit_tmin, double fit_tmax,
                                         int fit_steps, const ClassifyOptions& opt) {
  check_invertible(g1);
  check_invertible(g2);
  if (g1.rows() != g2.rows()) throw DomainError("torus generators differ in dimension");
  const double scale = std::max({1.0, g1.norm(), g2.norm()});
  if (commutator_norm(g1, g2) > 1e-10 * scale * scale) throw DomainError("torus generators do not commute");
  if (is_semisimple(g1, opt.condition_threshold) || is_semisimple(g2, opt.condition_threshold))
    throw DomainError("almost flat torus needs parabolic generators");
  AlmostFlatTorusMap out;
  out.ray = spd_decay_ray(g1, opt);
  out.g1 = g1;
  out.g2 = g2;
  out.generator2 = out.ray.frame.lu().solve(g2 * out.ray.frame);
  const Eigen::Index n = g1.rows();
  std::vector<int> size;
  for (std::size_t k = 0; k < out.ray.block_start.size(); ++k) {
    const int next = k + 1 < out.ray.block_start.size() ? out.ray.block_start[k + 1] : static_cast<int>(n);
    size.push_back(next - out.ray.block_start[k]);
  }
  const double bs = std::max(1.0, out.generator2.norm());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      if (in_same_block(out.ray.block_start, size, i, j)) continue;
      if (std::abs(out.generator2(i, j)) > 1e-8 * bs)
        throw DomainError("generators do not fix the same point at infinity");
      out.generator2(i, j) = 0.0;
    }
  out.fit1 = decay_ray(out.ray, fit_tmin, fit_tmax, fit_steps).fit;
  const Matrix m2 = out.generator2;
  const Vector v = out.ray.direction;
  out.fit2 = analyze_ray([&](double t) { return frame_displacement(m2, v, t); }, fit_tmin, fit_tmax, fit_steps).fit;
  return out;
}

TorusDerivatives torus_derivatives(const FlatTorusMap& h, double x, double y, double eps) {
  const Matrix p = h(x, y);
  TorusDerivatives d;
  d.dx_sq = spd_norm_sq(p, (h(x + eps, y) - h(x - eps, y)) / (2.0 * eps));
  d.dy_sq = spd_norm_sq(p, (h(x, y + eps) - h(x, y - eps)) / (2.0 * eps));
  return d;
}

TorusDerivatives torus_derivatives(const AlmostFlatTorusMap& h, double t, double x, double y, double eps) {
  const Matrix p = h.in_frame(t, x, y);
  TorusDerivatives d;
  d.dt_sq = spd_norm_sq(p, (h.in_frame(t + eps, x, y) - h.in_frame(t - eps, x, y)) / (2.0 * eps));
  d.dx_sq = spd_norm_sq(p, (h.in_frame(t, x + eps, y) - h.in_frame(t, x - eps, y)) / (2.0 * eps));
  d.dy_sq = spd_norm_sq(p, (h.in_frame(t, x, y + eps) - h.in_frame(t, x, y - eps)) / (2.0 * eps));
  return d;
}

// ---------------------------------------------------------------------------
std::function<Matrix(double)> basepoint_curve(const SpdIsometry& iso) {
  const SpdDecayRay ray = spd_decay_ray(iso.g);
  if (ray.classification == IsometryClass::parabolic) return [ray](double s) { return ray.point(s); };
  const Matrix p = ray.point(0.0);
  return [p](double) { return p; };
}

std::function<std::complex<double>(double)> basepoint_curve(const MobiusMap& iso) {
  const DiskDecayRay ray = disk_decay_ray(iso);
  if (ray.classification == IsometryClass::parabolic) return [ray](double s) { return ray.point(s); };
  const cd p = ray.point(0.0);
  return [p](double) { return p; };
}

std::function<Vector(double)> basepoint_curve(const EuclideanMotion& iso) {
  const Eigen::Index n = iso.rotation.rows();
  const Vector x =
      Eigen::CompleteOrthogonalDecomposition<Matrix>(iso.rotation - Matrix::Identity(n, n)).solve(-iso.shift);
  return [x](double) { return x; };
}

std::function<TreePoint(double)> basepoint_curve(const TreeAutomorphism& iso) {
  const MetricTree& t = iso.tree;
  if (t.edge_count() == 0) throw DomainError("tree without edges has no points");
  auto farthest = [&](int from) {
    int best = from;
    for (int v = 0; v < t.vertex_count(); ++v)
      if (t.vertex_distance(from, v) > t.vertex_distance(from, best)) best = v;
    return best;
  };
  const int u = farthest(0);
  const int w = farthest(u);
  // Automorphisms fix the midpoint of every diameter.
  const TreePoint c = t.interp(t.vertex_point(u), t.vertex_point(w), 0.5);
  return [c](double) { return c; };
}

}  // namespace npch
