#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ptlat/breather.hpp"
#include "ptlat/error.hpp"
#include "ptlat/hessian.hpp"
#include "ptlat/lattice.hpp"

namespace ptlat {

// Terms of the polynomial expansion of the energy difference
//   Delta(phi) = Lambda_E(Phi + phi) - Lambda_E(Phi) = N1 + N2 + N3 + N4,
// homogeneous of degree 1..4 in the perturbation phi = (du, dv).
struct ExpansionTerms {
  double n1 = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;
  double n4 = 0.0;
  double delta = 0.0;
};

// Energy difference Delta(phi) via two Lyapunov-functional evaluations.
inline double delta_of(const BreatherProfile& profile, const LatticeState& phi,
                       const Params& params) {
  require(phi.n_half == profile.n_half, ErrorKind::validation,
          "perturbation must live on the profile lattice");
  LatticeState base = profile.to_state();
  LatticeState shifted{base.n_half, base.u + phi.u, base.v + phi.v};
  return lambda_e(shifted, params) - lambda_e(base, params);
}

// Interleaved 4-component vector (du_n, conj(du)_n, dv_n, conj(dv)_n) per site.
inline Eigen::VectorXcd four_component(const LatticeState& phi) {
  int m = phi.size();
  Eigen::VectorXcd out(4 * m);
  for (int k = 0; k < m; ++k) {
    out[4 * k + 0] = phi.u[k];
    out[4 * k + 1] = std::conj(phi.u[k]);
    out[4 * k + 2] = phi.v[k];
    out[4 * k + 3] = std::conj(phi.v[k]);
  }
  return out;
}

// N1 and N2 evaluated directly from their definitions (linear term summed off
// the center site; quadratic term through the extended-kind Hessian plus the
// off-center E cross-term); N3 and N4 recovered exactly by odd/even sampling of
// the remainder R(s) = Delta(s phi) - s N1 - s^2 N2 at s = +-1.
inline ExpansionTerms expansion_terms(const BreatherProfile& profile, const LatticeState& phi,
                                      const Params& params) {
  require(phi.n_half == profile.n_half, ErrorKind::validation,
          "perturbation must live on the profile lattice");
  int m = phi.size();
  int center = profile.n_half;
  double e = params.e_freq;

  Complex lin{0.0};
  Complex cross{0.0};
  for (int k = 0; k < m; ++k) {
    if (k == center) continue;
    Complex un = profile.u[k];
    Complex vn = std::conj(un);
    lin += std::conj(vn) * phi.u[k] + vn * std::conj(phi.u[k]) +
           std::conj(un) * phi.v[k] + un * std::conj(phi.v[k]);
    cross += std::conj(phi.v[k]) * phi.u[k] + phi.v[k] * std::conj(phi.u[k]);
  }

  ExpansionTerms terms;
  terms.n1 = e * detail::take_real(lin, profile.u.norm() * phi.u.norm() + 1.0, "expansion n1");

  HessianMatrix h = assemble_hessian(profile, HessianKind::extended);
  Eigen::VectorXcd p4 = four_component(phi);
  Complex quad = p4.dot(h.entries * p4);  // Hermitian form, real up to round-off
  terms.n2 = 0.5 * detail::take_real(quad, p4.squaredNorm() * (1.0 + std::abs(e)), "expansion n2") +
             e * detail::take_real(cross, phi.norm_sq() + 1.0, "expansion cross");

  double d1 = delta_of(profile, phi, params);
  LatticeState minus{phi.n_half, -phi.u, -phi.v};
  double dm = delta_of(profile, minus, params);
  double r_plus = d1 - terms.n1 - terms.n2;
  double r_minus = dm + terms.n1 - terms.n2;
  terms.n3 = 0.5 * (r_plus - r_minus);
  terms.n4 = 0.5 * (r_plus + r_minus);
  terms.delta = d1;
  return terms;
}

// Delta0: the expansion evaluated at the conjugate-symmetric correction
// perturbation rho = (a, conj a); scales like eps^2 along the branch.
inline double delta_zero(const BreatherProfile& profile, const CorrectionTerm& correction,
                         const Params& params) {
  LatticeState rho{profile.n_half, correction.a, correction.a.conjugate()};
  ExpansionTerms terms = expansion_terms(profile, rho, params);
  return terms.n1 + terms.n2 + terms.n3 + terms.n4;
}

}  // namespace ptlat
