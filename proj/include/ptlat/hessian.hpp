#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>

#include "ptlat/breather.hpp"
#include "ptlat/dimer.hpp"
#include "ptlat/error.hpp"
#include "ptlat/lattice.hpp"

namespace ptlat {

// Two second-variation operators share the same block layout; the modified kind
// drops the E entries from every off-center block (they are absorbed into the
// center-site charge term of the Lyapunov functional).
enum class HessianKind { extended, modified };

struct HessianMatrix {
  int dim = 0;  // 4 * (2 n_half + 1)
  Eigen::MatrixXcd entries;
  HessianKind kind = HessianKind::extended;
};

namespace detail {

// Site-diagonal 4x4 block in component order (u, conj u, v, conj v).
inline Eigen::Matrix4cd hessian_block(Complex u_site, double e_coef, double omega,
                                      double gamma) {
  double a2 = std::norm(u_site);
  Complex s = u_site * u_site + std::conj(u_site) * std::conj(u_site);
  double d = omega + 8.0 * a2;
  Complex p = -e_coef - I * gamma + 4.0 * s;
  Complex q = -e_coef + I * gamma + 4.0 * s;
  Eigen::Matrix4cd block;
  block << d, 2.0 * s, p, 4.0 * a2,
      2.0 * s, d, 4.0 * a2, q,
      std::conj(p), 4.0 * a2, d, 2.0 * s,
      4.0 * a2, std::conj(q), 2.0 * s, d;
  return block;
}

}  // namespace detail

// Dense Hermitian second-variation matrix on the 4-component site-major layout,
// with eps times the (blockwise) discrete Laplacian coupling and zero exterior.
inline HessianMatrix assemble_hessian(const BreatherProfile& profile, HessianKind kind) {
  const Params& p = profile.params;
  int m = 2 * profile.n_half + 1;
  int dim = 4 * m;
  HessianMatrix h;
  h.dim = dim;
  h.kind = kind;
  h.entries = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < m; ++k) {
    int n = k - profile.n_half;
    double e_coef = (kind == HessianKind::extended || n == 0) ? p.e_freq : 0.0;
    h.entries.block<4, 4>(4 * k, 4 * k) =
        detail::hessian_block(profile.u[k], e_coef, p.omega, p.gamma);
    h.entries.block<4, 4>(4 * k, 4 * k) -=
        2.0 * p.epsilon * Eigen::Matrix4cd::Identity();
    if (k + 1 < m) {
      h.entries.block<4, 4>(4 * k, 4 * (k + 1)) =
          p.epsilon * Eigen::Matrix4cd::Identity();
      h.entries.block<4, 4>(4 * (k + 1), 4 * k) =
          p.epsilon * Eigen::Matrix4cd::Identity();
    }
  }
  return h;
}

// Gauge-mode eigenvector sigma Phi with per-site blocks (U_n, -conj(U)_n, V_n, -conj(V)_n),
// V = conj(U); annihilated by the extended-kind matrix.
inline Eigen::VectorXcd kernel_vector(const BreatherProfile& profile) {
  int m = 2 * profile.n_half + 1;
  Eigen::VectorXcd w(4 * m);
  for (int k = 0; k < m; ++k) {
    Complex un = profile.u[k];
    w[4 * k + 0] = un;
    w[4 * k + 1] = -std::conj(un);
    w[4 * k + 2] = std::conj(un);
    w[4 * k + 3] = -un;
  }
  return w;
}

inline double kernel_residual(const BreatherProfile& profile) {
  Eigen::VectorXcd w = kernel_vector(profile);
  double wn = w.norm();
  require(wn > 0.0, ErrorKind::invalid_state, "kernel vector vanishes on zero profile");
  HessianMatrix h = assemble_hessian(profile, HessianKind::extended);
  return (h.entries * w).norm() / wn;
}

// Closed-form eigenvalues {0, mu1, mu2, mu3} of the center block of the
// modified-kind operator on the dimer branch:
//   mu1 = 2(Omega + 4A^2),
//   mu2,3 = Omega + 12A^2 +- sqrt((Omega - 4A^2)^2 + 16 Omega A^2 gamma^2 / (Omega + 4A^2)^2).
inline std::array<double, 4> dimer_block_eigenvalues(const Params& params, double amplitude) {
  require(amplitude > 0.0, ErrorKind::validation,
          "block eigenvalues are defined on the nonlinear branch (A > 0)");
  double om = params.omega, ga = params.gamma;
  double x = amplitude * amplitude;
  double p4 = om + 4.0 * x;
  double mu1 = 2.0 * p4;
  double disc = (om - 4.0 * x) * (om - 4.0 * x) + 16.0 * om * x * ga * ga / (p4 * p4);
  require(disc >= 0.0, ErrorKind::no_real_solution, "block discriminant negative off-branch");
  double root = std::sqrt(disc);
  double mu2 = om + 12.0 * x + root;
  double mu3 = om + 12.0 * x - root;
  return {0.0, mu1, mu2, mu3};
}

// Minimum eigenvalue of the modified-kind matrix restricted to the orthogonal
// complement of the gauge mode (the constrained subspace of the stability argument).
inline double coercivity_on_constrained(const BreatherProfile& profile) {
  HessianMatrix h = assemble_hessian(profile, HessianKind::modified);
  Eigen::VectorXcd w = kernel_vector(profile);
  double wn = w.norm();
  require(wn > 0.0, ErrorKind::invalid_state, "kernel vector vanishes on zero profile");
  w /= wn;
  // Full unitary Q with first column w; remaining columns span the complement.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(w);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(h.dim, h.dim);
  Eigen::MatrixXcd basis = q.rightCols(h.dim - 1);
  Eigen::MatrixXcd constrained = basis.adjoint() * h.entries * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(constrained,
                                                         Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// Sorted spectrum of the requested kind (Hermitian, so real).
inline Eigen::VectorXd hessian_spectrum(const BreatherProfile& profile, HessianKind kind) {
  HessianMatrix h = assemble_hessian(profile, kind);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.entries, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

struct SpectralReport {
  Eigen::VectorXd eigenvalues;  // modified kind, ascending
  double kernel_residual = 0.0;
  double coercivity_c2 = 0.0;
};

inline SpectralReport make_spectral_report(const BreatherProfile& profile) {
  SpectralReport rep;
  rep.eigenvalues = hessian_spectrum(profile, HessianKind::modified);
  rep.kernel_residual = kernel_residual(profile);
  rep.coercivity_c2 = coercivity_on_constrained(profile);
  return rep;
}

// Plane-wave frequencies of the zero state: lambda+-(k) = +-sqrt((Omega - eps w_k)^2 - gamma^2)
// with w_k = 4 sin^2(k/2); real for all k exactly when the gain/loss is below threshold.
inline std::pair<Complex, Complex> zero_equilibrium_dispersion(const Params& params, double k) {
  require(k >= 0.0 && k <= M_PI + 1e-15, ErrorKind::validation, "wavenumber must lie in [0, pi]");
  double wk = 4.0 * std::sin(0.5 * k) * std::sin(0.5 * k);
  double base = params.omega - params.epsilon * wk;
  Complex lam = std::sqrt(Complex{base * base - params.gamma * params.gamma, 0.0});
  return {lam, -lam};
}

// Gain/loss threshold of the zero state: Omega - 4 eps for Omega > 0, |Omega| for Omega < 0.
inline double dispersion_threshold_gamma(double omega, double epsilon) {
  require(omega != 0.0, ErrorKind::domain, "threshold undefined at omega = 0");
  return omega > 0.0 ? omega - 4.0 * epsilon : -omega;
}

// Largest gamma on a Delta-gamma grid for which lambda(k) stays real over a k-scan;
// brackets the phase-transition boundary empirically.
inline double scan_stability_boundary(double omega, double epsilon, double gamma_max,
                                      double dgamma = 1e-4, int nk = 2001) {
  require(gamma_max > 0.0 && dgamma > 0.0 && nk >= 2, ErrorKind::validation,
          "bad scan parameters");
  Params probe;
  probe.omega = omega;
  probe.epsilon = epsilon;
  double last_stable = 0.0;
  for (double ga = dgamma; ga <= gamma_max + 0.5 * dgamma; ga += dgamma) {
    probe.gamma = ga;
    bool stable = true;
    for (int j = 0; j < nk && stable; ++j) {
      double k = M_PI * j / (nk - 1);
      auto [lp, lm] = zero_equilibrium_dispersion(probe, k);
      if (std::abs(lp.imag()) > 0.0) stable = false;
    }
    if (stable)
      last_stable = ga;
    else
      break;
  }
  return last_stable;
}

}  // namespace ptlat
