#pragma once

// Weighted integral inequality on (0, 1/4]:
//   int psi(r) dr / (r (log r^2)^2)  <=  c log 2 + int (psi(r) - c) dr / r
// evaluated shell by shell over 2^{-i-1} <= r <= 2^{-i}, i >= 2, in the
// variable s = -log r. The part below the last shell uses u = 1/s.

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace npch {

struct CalculusReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // rhs - lhs
  int shells = 0;
  double tolerance = 1e-6;
  bool ok = true;  // residual >= -tolerance
};

struct CalculusOptions {
  int last_shell = 80;
  double shell_tol = 1e-12;
  double tolerance = 1e-6;
  int samples_per_shell = 16;  // lower-bound check points per shell
};

CalculusReport calculus_weight_check(const std::function<double(double)>& psi, double c,
                                     const CalculusOptions& opt = {});

// Tabulated psi, linearly interpolated in r; below the smallest sample psi is
// taken equal to c.
CalculusReport calculus_weight_check(std::span<const std::pair<double, double>> table, double c,
                                     const CalculusOptions& opt = {});

// The three reference weights: c, c + r, c + r^2 sin^2(1/r) (the oscillating
// term is dropped below r = 1e-100).
std::function<double(double)> reference_weight(int kind, double c);

}  // namespace npch
