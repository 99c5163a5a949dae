#include "npch/spd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "npch/errors.hpp"

namespace npch {

double symmetry_defect(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

SymEig sym_eig(const Matrix& s, const JacobiOptions& opt) {
  if (s.rows() != s.cols()) throw DomainError("sym_eig: matrix is not square");
  const Eigen::Index n = s.rows();
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (symmetry_defect(s) > opt.symmetry_tol * scale) throw DomainError("sym_eig: matrix is not symmetric");

  Matrix a = symmetrize(s);
  Matrix v = Matrix::Identity(n, n);
  const double frob = a.norm();

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= opt.threshold * frob || off == 0.0) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation annihilating a(p,q); see Golub & Van Loan, sym.schur2.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymEig out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.rotation.col(k) = v.col(order[k]);
  }
  return out;
}

void validate_symmetric(const Matrix& v) {
  if (v.rows() != v.cols()) throw InvalidPoint("matrix is not square");
  const double scale = std::max(1.0, v.norm());
  if (symmetry_defect(v) > 1e-12 * scale) throw InvalidPoint("matrix is not symmetric");
}

void validate_spd(const Matrix& p) {
  validate_symmetric(p);
  if (p.rows() < 1) throw InvalidPoint("empty matrix");
  const SymEig eig = sym_eig(p);
  if (!(eig.values.minCoeff() > 1e-12)) throw InvalidPoint("matrix is not positive definite");
}

void validate_group_element(const Matrix& g) {
  if (g.rows() != g.cols() || g.rows() < 1) throw InvalidPoint("group element must be a square matrix");
  if (!(std::abs(g.determinant()) > 1e-12)) throw InvalidPoint("group element is singular");
}

namespace {

SymEig positive_eig(const Matrix& p) {
  SymEig eig = sym_eig(p);
  if (!(eig.values.minCoeff() > 1e-14)) throw InvalidPoint("matrix is not positive definite");
  return eig;
}

}  // namespace

Matrix sym_exp(const Matrix& v) {
  return spectral_apply(sym_eig(v), [](double x) { return std::exp(x); });
}

Matrix spd_log_identity(const Matrix& p) {
  return spectral_apply(positive_eig(p), [](double x) { return std::log(x); });
}

Matrix spd_sqrt(const Matrix& p) {
  return spectral_apply(positive_eig(p), [](double x) { return std::sqrt(x); });
}

Matrix spd_inv_sqrt(const Matrix& p) {
  return spectral_apply(positive_eig(p), [](double x) { return 1.0 / std::sqrt(x); });
}

double spd_tangent_norm(const Matrix& base, const Matrix& v) {
  const Matrix w = base.llt().solve(v);
  return std::sqrt(std::max(0.0, (w * w).trace()));
}

double spd_distance(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw InvalidPoint("spd_distance: dimension mismatch");
  const SymEig ep = positive_eig(p);
  const Matrix w = spectral_apply(ep, [](double x) { return 1.0 / std::sqrt(x); });
  const SymEig m = positive_eig(symmetrize(w * q * w));
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.values.size(); ++i) {
    const double l = std::log(m.values[i]);
    s += l * l;
  }
  return std::sqrt(s);
}

Matrix spd_exp(const Matrix& base, const Matrix& v, double t) {
  if (base.rows() != v.rows() || base.cols() != v.cols()) throw InvalidPoint("spd_exp: dimension mismatch");
  const SymEig eb = positive_eig(base);
  const Matrix half = spectral_apply(eb, [](double x) { return std::sqrt(x); });
  const Matrix ihalf = spectral_apply(eb, [](double x) { return 1.0 / std::sqrt(x); });
  const Matrix inner = sym_exp(symmetrize(t * (ihalf * v * ihalf)));
  return symmetrize(half * inner * half);
}

Matrix spd_log(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw InvalidPoint("spd_log: dimension mismatch");
  const SymEig ep = positive_eig(p);
  const Matrix half = spectral_apply(ep, [](double x) { return std::sqrt(x); });
  const Matrix ihalf = spectral_apply(ep, [](double x) { return 1.0 / std::sqrt(x); });
  const Matrix inner = spd_log_identity(symmetrize(ihalf * q * ihalf));
  return symmetrize(half * inner * half);
}

Matrix spd_geodesic(const Matrix& p, const Matrix& q, double t) {
  const SymEig ep = positive_eig(p);
  const Matrix half = spectral_apply(ep, [](double x) { return std::sqrt(x); });
  const Matrix ihalf = spectral_apply(ep, [](double x) { return 1.0 / std::sqrt(x); });
  const Matrix inner =
      spectral_apply(positive_eig(symmetrize(ihalf * q * ihalf)), [t](double x) { return std::pow(x, t); });
  return symmetrize(half * inner * half);
}

Matrix group_action(const Matrix& g, const Matrix& p) {
  if (g.cols() != p.rows() || p.rows() != p.cols()) throw InvalidPoint("group_action: dimension mismatch");
  return symmetrize(g * p * g.transpose());
}

}  // namespace npch
