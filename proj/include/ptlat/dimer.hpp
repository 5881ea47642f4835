#pragma once

#include <cmath>

#include "ptlat/error.hpp"
#include "ptlat/params.hpp"

namespace ptlat {

// Single-site stationary state U_0 = A e^{i theta} of the decoupled (epsilon = 0) lattice.
// The branch satisfies, simultaneously,
//   sin 2theta = gamma / (4A^2 + Omega),
//   cos 2theta = E / (8A^2 + Omega),
// which squares to E^2 = (Omega + 8A^2)^2 [1 - gamma^2/(Omega + 4A^2)^2].
struct DimerSolution {
  double amplitude = 0.0;  // A > 0
  double theta = 0.0;      // in [0, pi/2)
  double e_freq = 0.0;     // E on the continued branch
};

// Nonnegative branch value E(A); the caller picks the sign of E.
inline double dimer_branch_e(double amplitude, const Params& params) {
  require(std::isfinite(amplitude) && amplitude >= 0.0, ErrorKind::validation,
          "amplitude must be nonnegative");
  double om = params.omega, ga = params.gamma;
  double p4 = om + 4.0 * amplitude * amplitude;
  double p8 = om + 8.0 * amplitude * amplitude;
  require(p4 != 0.0, ErrorKind::validation, "degenerate branch point: omega + 4A^2 = 0");
  double r = ga / p4;
  require(std::abs(r) <= 1.0, ErrorKind::no_real_solution,
          "no real frequency: |gamma| exceeds |omega + 4A^2|");
  return std::abs(p8) * std::sqrt(1.0 - r * r);
}

namespace detail {

// E^2 as a function of x = A^2, and its x-derivative; strictly increasing for
// omega > gamma >= 0, x >= 0.
inline double branch_e_sq(double x, double om, double ga) {
  double p4 = om + 4.0 * x, p8 = om + 8.0 * x;
  return p8 * p8 * (1.0 - ga * ga / (p4 * p4));
}

inline double branch_e_sq_deriv(double x, double om, double ga) {
  double p4 = om + 4.0 * x, p8 = om + 8.0 * x;
  return 16.0 * p8 * (1.0 - ga * ga / (p4 * p4)) + p8 * p8 * (8.0 * ga * ga / (p4 * p4 * p4));
}

}  // namespace detail

// Inverts the branch: finds A > 0 with E(A) = |params.e_freq|, then the angle theta.
// Supported regime: omega > gamma >= 0 and |E| > e0 (the small-amplitude dimer branch).
inline DimerSolution dimer_solve(const Params& params) {
  double om = params.omega, ga = params.gamma, e = params.e_freq;
  require(std::isfinite(om) && std::isfinite(ga) && std::isfinite(e), ErrorKind::validation,
          "parameters must be finite");
  require(ga >= 0.0, ErrorKind::validation, "gamma must be nonnegative");
  require(om >= -ga, ErrorKind::unsupported_branch,
          "omega < -gamma branch is not continuable from the decoupled limit");
  double ezero = e0(params);  // domain error when |omega| <= gamma
  require(om > ga, ErrorKind::domain, "dimer branch requires omega > gamma");
  require(std::abs(e) > ezero, ErrorKind::out_of_branch,
          "|e_freq| must exceed e0 on the dimer branch");

  double target = e * e;
  // Bracket in x = A^2: E^2 is strictly increasing from e0^2 at x = 0.
  double lo = 0.0, hi = 1.0;
  while (detail::branch_e_sq(hi, om, ga) < target) {
    hi *= 2.0;
    require(hi < 1e12, ErrorKind::no_real_solution, "failed to bracket amplitude");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (detail::branch_e_sq(mid, om, ga) < target ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {  // Newton polish to full precision
    double g = detail::branch_e_sq(x, om, ga) - target;
    double gp = detail::branch_e_sq_deriv(x, om, ga);
    double step = g / gp;
    x -= step;
    if (x < 0.0) x = 0.0;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }

  DimerSolution sol;
  sol.amplitude = std::sqrt(x);
  sol.e_freq = e;
  double s2 = ga / (om + 4.0 * x);
  double c2 = e / (om + 8.0 * x);
  sol.theta = 0.5 * std::atan2(s2, c2);
  return sol;
}

}  // namespace ptlat
