#include "npch/bochner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"
#include "npch/errors.hpp"
#include "npch/parallel.hpp"
#include "npch/spd.hpp"

namespace npch {

namespace {

constexpr cplx kI{0.0, 1.0};

cplx ipow(cplx z, int k) {
  cplx r = 1.0;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

// Wirtinger central difference of a field f at p along var.
template <class F>
auto wirtinger(const F& f, const Point4& p, int var, double h) {
  using T = std::decay_t<decltype(f(p))>;
  const int ax = (var / 2) * 2;
  const double s = (var % 2 == 0) ? -1.0 : 1.0;
  Point4 a = p, b = p, c = p, d = p;
  a[ax] += h;
  b[ax] -= h;
  c[ax + 1] += h;
  d[ax + 1] -= h;
  const T dx = (f(a) - f(b)) / (2.0 * h);
  const T dy = (f(c) - f(d)) / (2.0 * h);
  return T(0.5 * (dx + (s * kI) * dy));
}

VForm wedge_left(int var, const VForm& f) {
  VForm out = VForm::Zero(f.rows(), 16);
  const unsigned bit = 1u << var;
  for (unsigned m = 0; m < 16; ++m)
    if (!(m & bit)) out.col(m | bit) += static_cast<double>(wedge_sign(bit, m)) * f.col(m);
  return out;
}

Form wedge_left(int var, const Form& f) {
  Form out = Form::Zero();
  const unsigned bit = 1u << var;
  for (unsigned m = 0; m < 16; ++m)
    if (!(m & bit)) out(m | bit) += static_cast<double>(wedge_sign(bit, m)) * f(m);
  return out;
}

VForm one_form(const std::array<Eigen::VectorXcd, 4>& d, int first, int second) {
  VForm f = VForm::Zero(d[0].size(), 16);
  f.col(1u << first) = d[static_cast<std::size_t>(first)];
  f.col(1u << second) = d[static_cast<std::size_t>(second)];
  return f;
}

double max_abs(const Form& f) { return f.cwiseAbs().maxCoeff(); }

template <class Node>
ResidualReport mesh_study(const ProbeOptions& opt, double scale_floor, Node&& node) {
  if (opt.mesh < 8) throw DomainError("probe mesh needs at least 8 nodes per axis");
  const std::vector<Point4> nodes = probe_nodes(opt);
  const double h = 2.0 / opt.mesh;
  std::vector<std::array<double, 4>> out(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto [r1, d1, s1] = node(nodes[k], h);
      const auto [r2, d2, s2] = node(nodes[k], 0.5 * h);
      out[k] = {r1, r2, std::max(d1, d2), std::max(s1, s2)};
    }
  });
  ResidualReport rep;
  double scale = scale_floor;
  for (const auto& o : out) {
    rep.residual_h = std::max(rep.residual_h, o[0]);
    rep.residual_half_h = std::max(rep.residual_half_h, o[1]);
    rep.discrete_defect = std::max(rep.discrete_defect, o[2]);
    scale = std::max(scale, o[3]);
  }
  rep.order_reported = rep.residual_h > 1e-9 * (1.0 + scale) && rep.residual_half_h > 0.0;
  rep.observed_order = rep.order_reported ? std::log2(rep.residual_h / rep.residual_half_h)
                                          : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace

Polynomial::Polynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw DomainError("polynomial needs at least one term");
  dim_ = static_cast<int>(terms_.front().coefficient.size());
  if (dim_ < 1) throw DomainError("polynomial coefficients must be nonempty vectors");
  for (const Monomial& m : terms_) {
    if (m.coefficient.size() != dim_) throw DomainError("polynomial coefficients differ in length");
    for (int p : m.powers)
      if (p < 0) throw DomainError("monomial powers must be nonnegative");
  }
}

Polynomial Polynomial::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("generator is not valid JSON: ") + e.what());
  }
  const nlohmann::json& list = j.is_object() ? j.at("terms") : j;
  if (!list.is_array()) throw DomainError("generator must be a list of terms");
  std::vector<Monomial> terms;
  try {
    for (const auto& t : list) {
      Monomial m;
      const auto& pw = t.at("powers");
      if (pw.size() != 4) throw DomainError("monomial powers need four entries");
      for (int k = 0; k < 4; ++k) m.powers[static_cast<std::size_t>(k)] = pw.at(static_cast<std::size_t>(k)).get<int>();
      const auto& c = t.at("coefficient");
      m.coefficient.resize(static_cast<Eigen::Index>(c.size()));
      for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& ci = c[i];
        m.coefficient(static_cast<Eigen::Index>(i)) =
            ci.is_array() ? cplx(ci.at(0).get<double>(), ci.at(1).get<double>()) : cplx(ci.get<double>(), 0.0);
      }
      terms.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed generator term: ") + e.what());
  }
  return Polynomial(std::move(terms));
}

std::string Polynomial::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const Monomial& m : terms_) {
    nlohmann::json c = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.coefficient.size(); ++i) c.push_back({m.coefficient(i).real(), m.coefficient(i).imag()});
    list.push_back({{"powers", m.powers}, {"coefficient", c}});
  }
  return list.dump();
}

Eigen::VectorXcd Polynomial::operator()(const Point4& p) const {
  const cplx z1(p[0], p[1]), z2(p[2], p[3]);
  const std::array<cplx, 4> v{z1, std::conj(z1), z2, std::conj(z2)};
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim_);
  for (const Monomial& m : terms_) {
    cplx s = 1.0;
    for (std::size_t k = 0; k < 4; ++k) s *= ipow(v[k], m.powers[k]);
    out += s * m.coefficient;
  }
  return out;
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var > 3) throw DomainError("derivative variable must be 0..3");
  std::vector<Monomial> out;
  for (const Monomial& m : terms_) {
    const int k = m.powers[static_cast<std::size_t>(var)];
    if (k == 0) continue;
    Monomial d = m;
    d.powers[static_cast<std::size_t>(var)] = k - 1;
    d.coefficient *= static_cast<double>(k);
    out.push_back(std::move(d));
  }
  if (out.empty()) {
    Monomial zero;
    zero.coefficient = Eigen::VectorXcd::Zero(dim_);
    out.push_back(std::move(zero));
  }
  return Polynomial(std::move(out));
}

int wedge_sign(unsigned a, unsigned b) {
  int inv = 0;
  for (int i = 0; i < 4; ++i)
    if (a & (1u << i)) inv += std::popcount(b & ((1u << i) - 1u));
  return (inv % 2 == 0) ? 1 : -1;
}

Form wedge(const Form& a, const Form& b) {
  Form out = Form::Zero();
  for (unsigned i = 0; i < 16; ++i) {
    if (a(i) == 0.0) continue;
    for (unsigned j = 0; j < 16; ++j)
      if (!(i & j) && b(j) != 0.0) out(i | j) += static_cast<double>(wedge_sign(i, j)) * a(i) * b(j);
  }
  return out;
}

Form basis_form(int var) {
  Form f = Form::Zero();
  f(1u << var) = 1.0;
  return f;
}

Form conjugate(const Form& f) {
  Form out = Form::Zero();
  for (unsigned m = 0; m < 16; ++m) {
    if (f(m) == 0.0) continue;
    std::vector<int> seq;
    for (int i = 0; i < 4; ++i)
      if (m & (1u << i)) seq.push_back(i ^ 1);
    int inv = 0;
    unsigned mask = 0;
    for (std::size_t a = 0; a < seq.size(); ++a) {
      mask |= 1u << seq[a];
      for (std::size_t b = a + 1; b < seq.size(); ++b) inv += seq[a] > seq[b];
    }
    out(mask) += (inv % 2 == 0 ? 1.0 : -1.0) * std::conj(f(m));
  }
  return out;
}

cplx volume_density(const Form& f) { return -4.0 * f(15); }

Form bracket(const VForm& psi, const VForm& xi) {
  if (psi.rows() != xi.rows()) throw DomainError("bracket of forms with different target dimensions");
  Form out = Form::Zero();
  for (Eigen::Index i = 0; i < psi.rows(); ++i)
    out += wedge(Form(psi.row(i).transpose()), conjugate(Form(xi.row(i).transpose())));
  return out;
}

DiscreteForms fd_forms(const Polynomial& u, const Point4& p, double h) {
  const auto ubar = [&u](const Point4& q) { return Eigen::VectorXcd(u(q).conjugate()); };
  std::array<Eigen::VectorXcd, 4> d, db;
  for (int v = 0; v < 4; ++v) {
    d[static_cast<std::size_t>(v)] = wirtinger(u, p, v, h);
    db[static_cast<std::size_t>(v)] = wirtinger(ubar, p, v, h);
  }
  return {one_form(d, 0, 2) * 1.0, one_form(d, 1, 3), one_form(db, 0, 2), one_form(db, 1, 3)};
}

DiscreteForms exact_forms(const Polynomial& u, const Point4& p) {
  std::array<Eigen::VectorXcd, 4> d, db;
  for (int v = 0; v < 4; ++v) d[static_cast<std::size_t>(v)] = u.derivative(v)(p);
  // d/dz conj(u) = conj(d/dzbar u)
  for (int v = 0; v < 4; ++v) db[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(v ^ 1)].conjugate();
  return {one_form(d, 0, 2), one_form(d, 1, 3), one_form(db, 0, 2), one_form(db, 1, 3)};
}

std::vector<Point4> probe_nodes(const ProbeOptions& opt) {
  if (opt.mesh < 8) throw DomainError("probe mesh needs at least 8 nodes per axis");
  const int n = opt.mesh;
  const double h = 2.0 / n;
  const auto coord = [&](int i) { return -1.0 + i * h; };
  const auto snap = [&](double x) { return coord(static_cast<int>(std::lround((x + 1.0) / h))); };
  const int lo = 3, hi = n - 3;
  const int count = hi - lo + 1;
  const int stride = std::max(1, (count + opt.max_per_axis - 1) / std::max(1, opt.max_per_axis));
  std::vector<Point4> nodes;
  const double a2 = snap(0.3), b2 = snap(-0.2), a1 = snap(-0.4), b1 = snap(0.1);
  for (int i = lo; i <= hi; i += stride)
    for (int j = lo; j <= hi; j += stride) nodes.push_back({coord(i), coord(j), a2, b2});
  for (int i = lo; i <= hi; i += stride)
    for (int j = lo; j <= hi; j += stride) nodes.push_back({a1, b1, coord(i), coord(j)});
  return nodes;
}

ResidualReport check_form4(const Polynomial& u, const ProbeOptions& opt) {
  return mesh_study(opt, 0.0, [&u](const Point4& p, double h) {
    const DiscreteForms f = fd_forms(u, p, h);
    const DiscreteForms x = exact_forms(u, p);
    const Form a = bracket(f.du, f.du), b = bracket(f.d_ubar, f.d_ubar);
    const double r = std::max(max_abs(a + bracket(x.dbar_ubar, x.dbar_ubar)), max_abs(b + bracket(x.dbar_u, x.dbar_u)));
    const double d = std::max(max_abs(a + bracket(f.dbar_ubar, f.dbar_ubar)), max_abs(b + bracket(f.dbar_u, f.dbar_u)));
    return std::array<double, 3>{r, d, std::max(max_abs(a), max_abs(b))};
  });
}

ResidualReport check_commutation(const Polynomial& u, const ProbeOptions& opt) {
  return mesh_study(opt, 0.0, [&u](const Point4& p, double h) {
    const auto du = [&](const Point4& q) { return fd_forms(u, q, h).du; };
    const auto dbu = [&](const Point4& q) { return fd_forms(u, q, h).dbar_u; };
    VForm dd = VForm::Zero(u.target_dim(), 16), dbdb = dd, d_db = dd, db_d = dd;
    for (int a : {0, 2}) {
      dd += wedge_left(a, VForm(wirtinger(du, p, a, h)));
      d_db += wedge_left(a, VForm(wirtinger(dbu, p, a, h)));
    }
    for (int b : {1, 3}) {
      dbdb += wedge_left(b, VForm(wirtinger(dbu, p, b, h)));
      db_d += wedge_left(b, VForm(wirtinger(du, p, b, h)));
    }
    // exact d''d'u
    VForm db_d_exact = VForm::Zero(u.target_dim(), 16);
    for (int b : {1, 3})
      for (int a : {0, 2}) {
        VForm one = VForm::Zero(u.target_dim(), 16);
        one.col(1u << a) = u.derivative(a).derivative(b)(p);
        db_d_exact += wedge_left(b, one);
      }
    const double r = std::max({(d_db + db_d_exact).cwiseAbs().maxCoeff(), dd.cwiseAbs().maxCoeff(),
                               dbdb.cwiseAbs().maxCoeff()});
    const double d = (d_db + db_d).cwiseAbs().maxCoeff();
    return std::array<double, 3>{r, d, d_db.cwiseAbs().maxCoeff()};
  });
}

SiuDensities siu_densities(const Polynomial& u, const Point4& p, double h) {
  const auto orig = [&](const Point4& q) {
    const VForm f = fd_forms(u, q, h).dbar_u;
    return bracket(f, f);
  };
  const auto conj_side = [&](const Point4& q) {
    const VForm f = fd_forms(u, q, h).dbar_ubar;
    return bracket(f, f);
  };
  const auto ddbar = [&](const auto& field) {
    const auto dbar = [&](const Point4& q) {
      Form s = Form::Zero();
      for (int g : {1, 3}) s += wedge_left(g, Form(wirtinger(field, q, g, h)));
      return s;
    };
    Form s = Form::Zero();
    for (int d : {0, 2}) s += wedge_left(d, Form(wirtinger(dbar, p, d, h)));
    return s;
  };
  const auto du = [&](const Point4& q) { return fd_forms(u, q, h).du; };
  const auto modified = [&](const Point4& q) {
    VForm psi = VForm::Zero(u.target_dim(), 16);
    for (int g : {1, 3}) psi += wedge_left(g, VForm(wirtinger(du, q, g, h)));
    const DiscreteForms f = fd_forms(u, q, h);
    return bracket(psi, VForm(f.dbar_u - f.du));
  };
  Form dmod = Form::Zero();
  for (int v = 0; v < 4; ++v) dmod += wedge_left(v, Form(wirtinger(modified, p, v, h)));

  double rhs = 0.0;
  for (int a : {0, 2})
    for (int b : {1, 3}) {
      const auto db = [&](const Point4& q) { return Eigen::VectorXcd(wirtinger(u, q, b, h)); };
      rhs += Eigen::VectorXcd(wirtinger(db, p, a, h)).squaredNorm();
    }
  return {volume_density(ddbar(orig)), volume_density(ddbar(conj_side)), volume_density(dmod), 4.0 * rhs};
}

SiuReport siu_residual_flat(const Polynomial& u, const ProbeOptions& opt) {
  SiuReport rep;
  std::vector<Polynomial> mixed;
  for (int a : {0, 2})
    for (int b : {1, 3}) mixed.push_back(u.derivative(a).derivative(b));
  const Polynomial lap1 = u.derivative(0).derivative(1), lap2 = u.derivative(2).derivative(3);
  for (const Point4& p : probe_nodes(opt)) {
    double r = 0.0;
    for (const Polynomial& m : mixed) r += m(p).squaredNorm();
    rep.max_rhs = std::max(rep.max_rhs, 4.0 * r);
    rep.harmonic_defect = std::max(rep.harmonic_defect, (lap1(p) + lap2(p)).cwiseAbs().maxCoeff());
  }
  const auto study = [&](auto pick) {
    return mesh_study(opt, rep.max_rhs, [&](const Point4& p, double h) {
      const SiuDensities s = siu_densities(u, p, h);
      const auto [r, d] = pick(s);
      return std::array<double, 3>{r, d, s.rhs};
    });
  };
  rep.original = study([](const SiuDensities& s) { return std::pair{std::abs(s.original - s.rhs), 0.0}; });
  rep.conjugate = study([](const SiuDensities& s) { return std::pair{std::abs(s.conjugate - s.rhs), 0.0}; });
  rep.modified = study([](const SiuDensities& s) { return std::pair{std::abs(s.modified - 2.0 * s.rhs), 0.0}; });
  rep.factor_two = study([](const SiuDensities& s) { return std::pair{std::abs(s.modified - 2.0 * s.original), 0.0}; });
  return rep;
}

std::vector<Polynomial> reference_generators() {
  const auto term = [](int a, int b, int c, int d, std::initializer_list<cplx> coef) {
    Monomial m;
    m.powers = {a, b, c, d};
    m.coefficient = Eigen::VectorXcd(static_cast<Eigen::Index>(coef.size()));
    Eigen::Index i = 0;
    for (cplx x : coef) m.coefficient(i++) = x;
    return m;
  };
  // z1^3 zbar1 zbar2 - 3/2 z1^2 z2 zbar2^2 is harmonic; the zbar-cubic terms keep the
  // mixed-derivative stencils from being exact.
  const auto h = [&](std::initializer_list<cplx> c) {
    std::vector<cplx> v(c);
    std::vector<cplx> w;
    for (cplx x : v) w.push_back(-1.5 * x);
    Monomial b = term(2, 0, 1, 2, {});
    b.coefficient = Eigen::Map<Eigen::VectorXcd>(w.data(), static_cast<Eigen::Index>(w.size()));
    return std::pair{term(3, 1, 0, 1, c), b};
  };
  const auto [a1, b1] = h({0.25, 0.0});
  const auto [a2, b2] = h({0.0, 0.5});
  const auto [a3, b3] = h({0.2 * kI, 0.3});
  return {
      Polynomial({term(1, 1, 0, 0, {1.0, kI}), term(0, 0, 1, 1, {-1.0, -kI}), term(3, 0, 0, 1, {0.5, 0.0}), term(0, 3, 0, 1, {0.2, 0.1}), a1, b1}),
      Polynomial({term(2, 0, 0, 2, {1.0, 0.0}), term(0, 3, 1, 0, {0.0, cplx(1.0, -1.0)}),
                  term(1, 1, 0, 0, {0.0, 0.5}), term(0, 0, 1, 1, {0.0, -0.5}), term(0, 1, 0, 3, {-0.3, 0.0}), a2, b2}),
      Polynomial({term(1, 0, 0, 3, {1.0, 1.0}), term(0, 2, 2, 0, {2.0, -1.0}), term(0, 1, 3, 0, {0.3, 0.7 * kI}), term(0, 3, 0, 1, {0.0, 0.4 * kI}), a3, b3}),
  };
}

Polynomial calibration_generator(const Eigen::VectorXcd& v) {
  Monomial a, b;
  a.powers = {1, 1, 0, 0};
  a.coefficient = v;
  b.powers = {0, 0, 1, 1};
  b.coefficient = -v;
  return Polynomial({a, b});
}

namespace {

std::vector<Matrix> sym_basis(int n) {
  std::vector<Matrix> out;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
      }
      out.push_back(std::move(e));
    }
  return out;
}

// <R(a,b)c, d> with R(X,Y)Z = -1/4 [[X,Y],Z]
double curvature_formula(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  const Matrix ab = a * b - b * a;
  return -0.25 * ((ab * c - c * ab) * d).trace();
}

std::vector<double> curvature_tensor(int n, double sign) {
  const auto e = sym_basis(n);
  const std::size_t N = e.size();
  std::vector<double> r(N * N * N * N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t k = 0; k < N; ++k)
        for (std::size_t l = 0; l < N; ++l)
          r[((i * N + j) * N + k) * N + l] = sign * curvature_formula(e[i], e[j], e[k], e[l]);
  return r;
}

double contract(const std::vector<double>& r, const Eigen::MatrixXcd& A) {
  const std::size_t N = static_cast<std::size_t>(A.rows());
  cplx s = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t k = 0; k < N; ++k)
        for (std::size_t l = 0; l < N; ++l) {
          const double v = r[((i * N + j) * N + k) * N + l];
          if (v != 0.0)
            s += v * A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) *
                 A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
        }
  return s.real();
}

}  // namespace

double hermitian_curvature_value(int n, const Eigen::MatrixXcd& A, double sign) {
  const Eigen::Index N = n * (n + 1) / 2;
  if (A.rows() != N || A.cols() != N) throw DomainError("matrix size does not match dim Sym(n)");
  return contract(curvature_tensor(n, sign), A);
}

CurvatureProbe hermitian_negativity_probe(int n, int samples, std::uint64_t seed, int rank) {
  if (n < 1 || n > 4) throw DomainError("curvature probe supports 1 <= n <= 4");
  if (samples < 1) throw DomainError("curvature probe needs at least one sample");
  CurvatureProbe rep;
  rep.samples = samples;
  const int N = n * (n + 1) / 2;
  if (n >= 2) {
    // d^2(exp sX, exp sY) = s^2 |X-Y|^2 - s^4/3 <R(X,Y)Y,X> + O(s^5)
    Matrix X = Matrix::Zero(n, n), Y = Matrix::Zero(n, n);
    X(0, 0) = 1.0;
    X(1, 1) = -1.0;
    Y(0, 1) = Y(1, 0) = 1.0 / std::sqrt(2.0);
    const double s = 1e-2;
    const double d = spd_distance(sym_exp(s * X), sym_exp(s * Y));
    rep.sectional_fd = -3.0 * (d * d - s * s * (X - Y).squaredNorm()) / std::pow(s, 4);
    rep.sectional_formula = curvature_formula(X, Y, Y, X);
    rep.sign = (rep.sectional_fd * rep.sectional_formula >= 0.0) ? 1.0 : -1.0;
  } else {
    rep.sign = 1.0;
  }
  const std::vector<double> r = curvature_tensor(n, rep.sign);
  const int k = rank > 0 ? rank : N;
  std::vector<double> values(static_cast<std::size_t>(samples));
  parallel_for(values.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto rng = task_rng(seed, i);
      std::normal_distribution<double> g(0.0, 1.0);
      Eigen::MatrixXcd B(N, k);
      for (int a = 0; a < N; ++a)
        for (int c = 0; c < k; ++c) B(a, c) = cplx(g(rng), g(rng));
      Eigen::MatrixXcd A = B * B.adjoint();
      A /= A.trace().real();
      values[i] = contract(r, A);
    }
  });
  rep.max_value = *std::max_element(values.begin(), values.end());
  rep.min_value = *std::min_element(values.begin(), values.end());
  return rep;
}

}  // namespace npch
