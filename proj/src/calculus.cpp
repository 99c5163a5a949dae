#include "npch/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "npch/errors.hpp"

namespace npch {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m, double fm,
               double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  return simpson(f, a, fa, b, fb, m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40);
}

}  // namespace

CalculusReport calculus_weight_check(const std::function<double(double)>& psi, double c, const CalculusOptions& opt) {
  if (!(c >= 0.0)) throw DomainError("c must be nonnegative");
  if (opt.last_shell < 2) throw DomainError("need at least one dyadic shell");
  auto weight = [&](double r) {
    const double v = psi(r);
    if (!(v >= c)) throw DomainError("psi falls below c at r = " + std::to_string(r));
    return v;
  };
  CalculusReport rep;
  rep.tolerance = opt.tolerance;
  const auto lhs_s = [&](double s) { return weight(std::exp(-s)) / (4.0 * s * s); };
  const auto rhs_s = [&](double s) { return weight(std::exp(-s)) - c; };
  for (int i = 2; i <= opt.last_shell; ++i) {
    const double s1 = i * kLn2, s2 = (i + 1) * kLn2;
    for (int k = 0; k <= opt.samples_per_shell; ++k) weight(std::exp(-(s1 + (s2 - s1) * k / opt.samples_per_shell)));
    rep.lhs += integrate(lhs_s, s1, s2, opt.shell_tol);
    rep.rhs += integrate(rhs_s, s1, s2, opt.shell_tol);
    ++rep.shells;
  }
  // Remaining r < 2^{-last_shell-1}: s in [S, inf), u = 1/s in (0, 1/S].
  const double u_max = 1.0 / ((opt.last_shell + 1) * kLn2);
  const auto lhs_u = [&](double u) { return u <= 0.0 ? c / 4.0 : weight(std::exp(-1.0 / u)) / 4.0; };
  const auto rhs_u = [&](double u) { return u <= 0.0 ? 0.0 : (weight(std::exp(-1.0 / u)) - c) / (u * u); };
  rep.lhs += integrate(lhs_u, 0.0, u_max, opt.shell_tol);
  rep.rhs += integrate(rhs_u, 0.0, u_max, opt.shell_tol);
  rep.rhs += c * kLn2;
  rep.residual = rep.rhs - rep.lhs;
  rep.ok = rep.residual >= -opt.tolerance;
  return rep;
}

CalculusReport calculus_weight_check(std::span<const std::pair<double, double>> table, double c,
                                     const CalculusOptions& opt) {
  if (table.empty()) throw DomainError("empty psi table");
  std::vector<std::pair<double, double>> t(table.begin(), table.end());
  std::sort(t.begin(), t.end());
  for (const auto& [r, v] : t) {
    if (!(r > 0.0) || r > 0.25 + 1e-15) throw DomainError("psi samples must lie in (0, 1/4]");
    if (!(v >= c)) throw DomainError("psi falls below c at r = " + std::to_string(r));
  }
  const auto psi = [t = std::move(t), c](double r) {
    if (r < t.front().first) return c;
    if (r >= t.back().first) return t.back().second;
    const auto it = std::upper_bound(t.begin(), t.end(), r,
                                     [](double x, const std::pair<double, double>& p) { return x < p.first; });
    const auto& [r1, v1] = *(it - 1);
    const auto& [r2, v2] = *it;
    return v1 + (v2 - v1) * (r - r1) / (r2 - r1);
  };
  return calculus_weight_check(psi, c, opt);
}

std::function<double(double)> reference_weight(int kind, double c) {
  switch (kind) {
    case 0: return [c](double) { return c; };
    case 1: return [c](double r) { return c + r; };
    case 2:
      return [c](double r) {
        if (r < 1e-100) return c;
        const double s = std::sin(1.0 / r);
        return c + r * r * s * s;
      };
  }
  throw DomainError("reference weight kind must be 0, 1 or 2");
}

}  // namespace npch
