#pragma once

// Finite-difference probes of the flat-target Bochner identities for
// polynomial maps C^2 -> C^m, and the Hermitian curvature sign probe on SPD(n).
//
// Forms on C^2 use the basis (dz1, dzbar1, dz2, dzbar2), indexed 0..3; a form
// is a 16-vector of coefficients indexed by bitmask, with basis monomials in
// increasing index order. The pairing on C^m is sum_i a^i conj(b^i). The
// Kaehler form is (i/2) sum dz^a ^ dzbar^a, so omega^2/2 = -1/4 dz1 dzbar1 dz2
// dzbar2 = dx1 dy1 dx2 dy2, and densities are reported against omega^2/2.

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace npch {

using cplx = std::complex<double>;
using Form = Eigen::Matrix<cplx, 16, 1>;
using VForm = Eigen::Matrix<cplx, Eigen::Dynamic, 16>;  // row i: component i
using Point4 = std::array<double, 4>;                    // (x1, y1, x2, y2)

// coefficient * z1^p0 zbar1^p1 z2^p2 zbar2^p3
struct Monomial {
  std::array<int, 4> powers{};
  Eigen::VectorXcd coefficient;
};

class Polynomial {
 public:
  explicit Polynomial(std::vector<Monomial> terms);
  static Polynomial from_json(const std::string& text);
  std::string to_json() const;

  int target_dim() const { return dim_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  Eigen::VectorXcd operator()(const Point4& p) const;
  // Exact Wirtinger derivative; var 0: z1, 1: zbar1, 2: z2, 3: zbar2.
  Polynomial derivative(int var) const;

 private:
  std::vector<Monomial> terms_;
  int dim_ = 0;
};

// Exterior algebra.
int wedge_sign(unsigned a, unsigned b);
Form wedge(const Form& a, const Form& b);
Form basis_form(int var);
Form conjugate(const Form& f);
// Density of a top-degree form against omega^2/2.
cplx volume_density(const Form& f);
// {psi, xi} = sum_i psi^i ^ conj(xi^i)
Form bracket(const VForm& psi, const VForm& xi);

struct DiscreteForms {
  VForm du;        // d'u
  VForm dbar_u;    // d''u
  VForm d_ubar;    // d' conj(u)
  VForm dbar_ubar; // d'' conj(u)
};

// Central-difference Wirtinger forms at p with step h.
DiscreteForms fd_forms(const Polynomial& u, const Point4& p, double h);
// Same forms from exact derivatives.
DiscreteForms exact_forms(const Polynomial& u, const Point4& p);

struct ResidualReport {
  double residual_h = 0.0;
  double residual_half_h = 0.0;
  double observed_order = 0.0;  // log2 ratio; NaN when residual_h is at rounding level
  bool order_reported = false;
  double discrete_defect = 0.0;  // the identity with both sides discrete
};

struct ProbeOptions {
  int mesh = 32;           // nodes per axis on [-1,1]
  int max_per_axis = 14;   // sample nodes per slice axis
};

// Coarse-mesh nodes shared by the mesh and its halving: two 2-D slices.
std::vector<Point4> probe_nodes(const ProbeOptions& opt);

ResidualReport check_form4(const Polynomial& u, const ProbeOptions& opt = {});
ResidualReport check_commutation(const Polynomial& u, const ProbeOptions& opt = {});

struct SiuReport {
  ResidualReport original;   // dd^c{d''u, d''u} against 4|d'd''u|^2
  ResidualReport conjugate;  // dd^c{d''ubar, d''ubar} against 4|d'd''u|^2
  ResidualReport modified;   // d{d''d'u, d''u - d'u} against 8|d'd''u|^2
  ResidualReport factor_two; // modified LHS - 2 * original LHS
  double harmonic_defect = 0.0;  // max |sum_a u_{a abar}| from exact derivatives
  double max_rhs = 0.0;          // max 4|d'd''u|^2 over the nodes
};

SiuReport siu_residual_flat(const Polynomial& u, const ProbeOptions& opt = {});

// Pointwise densities at p with step h.
struct SiuDensities {
  cplx original;
  cplx conjugate;
  cplx modified;
  double rhs;  // 4 |d'd''u|^2
};
SiuDensities siu_densities(const Polynomial& u, const Point4& p, double h);

// Generators used by the acceptance checks and the calibration map
// (|z1|^2 - |z2|^2) v, whose density 4|d'd''u|^2 equals 8|v|^2.
std::vector<Polynomial> reference_generators();
Polynomial calibration_generator(const Eigen::VectorXcd& v);

struct CurvatureProbe {
  double max_value = 0.0;
  double min_value = 0.0;
  double sign = -1.0;            // orientation fixed by the distance expansion
  double sectional_fd = 0.0;     // finite-difference sectional numerator for the reference pair
  double sectional_formula = 0.0;
  int samples = 0;
};

// R_{ijkl} A^{i lbar} A^{j kbar} on SPD(n) at the identity, A = B B^H random.
CurvatureProbe hermitian_negativity_probe(int n, int samples, std::uint64_t seed, int rank = 0);
double hermitian_curvature_value(int n, const Eigen::MatrixXcd& A, double sign = 1.0);

}  // namespace npch
