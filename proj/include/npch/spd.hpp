#pragma once

// Geometry of P(n,R), the cone of symmetric positive-definite matrices, with
// the invariant metric <V,W>_p = Tr(p^-1 V p^-1 W) and the GL(n,R) action
// G.p = G p G^T.

#include <Eigen/Dense>

namespace npch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEig {
  Vector values;    // descending
  Matrix rotation;  // columns are eigenvectors; S = R diag(values) R^T
};

struct JacobiOptions {
  double threshold = 1e-14;  // stop when off-diagonal mass <= threshold * |S|_F
  int max_sweeps = 100;
  double symmetry_tol = 1e-12;
};

// Cyclic Jacobi eigensolver for symmetric matrices. Throws DomainError on
// asymmetric input.
SymEig sym_eig(const Matrix& s, const JacobiOptions& opt = {});

// R f(diag) R^T for a precomputed decomposition.
template <class F>
Matrix spectral_apply(const SymEig& eig, F&& f) {
  Vector mapped(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) mapped[i] = f(eig.values[i]);
  return eig.rotation * mapped.asDiagonal() * eig.rotation.transpose();
}

double symmetry_defect(const Matrix& m);
Matrix symmetrize(const Matrix& m);

// Validation of the domain types. All throw InvalidPoint.
void validate_spd(const Matrix& p);
void validate_symmetric(const Matrix& v);
void validate_group_element(const Matrix& g);

Matrix sym_exp(const Matrix& v);
Matrix spd_log_identity(const Matrix& p);  // log p as a symmetric matrix
Matrix spd_sqrt(const Matrix& p);
Matrix spd_inv_sqrt(const Matrix& p);

// Norm sqrt(Tr(p^-1 V p^-1 V)) of a tangent vector V at p.
double spd_tangent_norm(const Matrix& base, const Matrix& v);

double spd_distance(const Matrix& p, const Matrix& q);

// Geodesic t -> p^{1/2} exp(t p^{-1/2} V p^{-1/2}) p^{1/2}.
Matrix spd_exp(const Matrix& base, const Matrix& v, double t = 1.0);

// Inverse of spd_exp at base: the tangent vector at p pointing to q.
Matrix spd_log(const Matrix& p, const Matrix& q);

// Point at fraction t along the geodesic from p to q (t may exceed [0,1]).
Matrix spd_geodesic(const Matrix& p, const Matrix& q, double t);

Matrix group_action(const Matrix& g, const Matrix& p);

}  // namespace npch
