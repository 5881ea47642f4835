#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "ptlat/dimer.hpp"
#include "ptlat/error.hpp"
#include "ptlat/lattice.hpp"
#include "ptlat/params.hpp"

namespace ptlat {

// Stationary PT-symmetric profile: psi(t) = (U, conj(U)) e^{-iEt} with
//   E U_n = eps(conj(U)_{n+1} - 2 conj(U)_n + conj(U)_{n-1}) + i gamma U_n
//           + Omega conj(U)_n + 6|U_n|^2 conj(U)_n + 2 U_n^3.
struct BreatherProfile {
  Params params;
  int n_half = 0;
  Vec u;                  // U_n on sites -n_half..n_half
  double residual = 0.0;  // inf-norm of the stationary defect
  int iterations = 0;     // Newton iterations spent (all continuation stages)

  int idx(int n) const { return n + n_half; }
  Complex at(int n) const { return u[idx(n)]; }

  LatticeState to_state() const { return {n_half, u, u.conjugate()}; }

  double symmetry_defect() const { return (u - u.reverse()).norm(); }
};

// Defect of the stationary equation at profile U.
inline Vec stationary_residual(const Vec& u, const Params& params) {
  Vec ub = u.conjugate();
  Vec lap = detail::laplacian(ub);
  Vec f(u.size());
  for (int i = 0; i < u.size(); ++i) {
    f[i] = params.epsilon * lap[i] + I * params.gamma * u[i] + params.omega * ub[i] +
           6.0 * std::norm(u[i]) * ub[i] + 2.0 * u[i] * u[i] * u[i] - params.e_freq * u[i];
  }
  return f;
}

namespace detail {

// Real-imaginary split of the complex Newton system dF = A dU + B d(conj U):
//   [Re dF]   [Re(A+B)   -Im(A-B)] [dx]
//   [Im dF] = [Im(A+B)    Re(A-B)] [dy]
// A and B are diagonal; B additionally carries eps * (discrete Laplacian).
inline Eigen::MatrixXd split_jacobian(const Vec& a_diag, const Vec& b_diag, double eps_lap) {
  int m = static_cast<int>(a_diag.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i) {
    Complex a = a_diag[i], b = b_diag[i];
    jac(i, i) = std::real(a + b);
    jac(i, m + i) = -std::imag(a - b);
    jac(m + i, i) = std::imag(a + b);
    jac(m + i, m + i) = std::real(a - b);
  }
  auto add_lap = [&](int row0, int col0, double sign) {
    for (int i = 0; i < m; ++i) {
      jac(row0 + i, col0 + i) += sign * (-2.0 * eps_lap);
      if (i > 0) jac(row0 + i, col0 + i - 1) += sign * eps_lap;
      if (i + 1 < m) jac(row0 + i, col0 + i + 1) += sign * eps_lap;
    }
  };
  if (eps_lap != 0.0) {
    add_lap(0, 0, 1.0);   // Re(A+B) += eps L
    add_lap(m, m, -1.0);  // Re(A-B) -= eps L
  }
  return jac;
}

struct NewtonResult {
  Vec u;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool singular = false;
};

// Damped Newton iteration for F(u) = 0 given the split-Jacobian pieces.
template <typename ResidualFn, typename JacobianFn>
NewtonResult newton_complex(Vec u, ResidualFn&& resid, JacobianFn&& jacobian, double tol,
                            int max_iter = 50) {
  int m = static_cast<int>(u.size());
  NewtonResult out;
  Vec f = resid(u);
  double fnorm = f.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter; ++it) {
    if (fnorm <= tol) {
      out.u = u;
      out.residual = fnorm;
      out.iterations = it;
      out.converged = true;
      return out;
    }
    Eigen::MatrixXd jac = jacobian(u);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) {
      out.u = u;
      out.residual = fnorm;
      out.iterations = it;
      out.singular = true;
      return out;
    }
    Eigen::VectorXd rhs_split(2 * m);
    rhs_split << -f.real(), -f.imag();
    Eigen::VectorXd step = lu.solve(rhs_split);
    double damping = 1.0;
    Vec u_next;
    Vec f_next;
    double fnorm_next = fnorm;
    bool accepted = false;
    for (int half = 0; half < 8; ++half) {
      u_next = u + damping * (step.head(m) + I * step.tail(m));
      f_next = resid(u_next);
      fnorm_next = f_next.lpNorm<Eigen::Infinity>();
      if (std::isfinite(fnorm_next) && fnorm_next < fnorm) {
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    if (!accepted) break;
    u = std::move(u_next);
    f = std::move(f_next);
    fnorm = fnorm_next;
  }
  out.u = u;
  out.residual = fnorm;
  out.iterations = max_iter;
  out.converged = fnorm <= tol;
  return out;
}

inline NewtonResult breather_newton(Vec u0, const Params& params, double tol) {
  auto resid = [&params](const Vec& u) { return stationary_residual(u, params); };
  auto jacobian = [&params](const Vec& u) {
    int m = static_cast<int>(u.size());
    Vec a_diag(m), b_diag(m);
    for (int i = 0; i < m; ++i) {
      Complex un = u[i], ub = std::conj(un);
      a_diag[i] = I * params.gamma + 6.0 * ub * ub + 6.0 * un * un - params.e_freq;
      b_diag[i] = params.omega + 12.0 * std::norm(un);
    }
    return split_jacobian(a_diag, b_diag, params.epsilon);
  };
  return newton_complex(std::move(u0), resid, jacobian, tol);
}

}  // namespace detail

// Continues the breather from the decoupled dimer to the requested epsilon.
// Direct Newton from the epsilon = 0 seed; on failure, geometric epsilon-stepping
// with step halving.
inline BreatherProfile solve_breather(const Params& params, int n_half, double tol = 1e-12,
                                      double eps_max = 0.2) {
  require(n_half >= 0, ErrorKind::validation, "n_half must be nonnegative");
  require(tol > 0.0, ErrorKind::validation, "tol must be positive");
  require(params.epsilon <= eps_max, ErrorKind::validation,
          "epsilon exceeds the supported continuation range");
  DimerSolution dimer = dimer_solve(params);

  int m = 2 * n_half + 1;
  Vec seed = Vec::Zero(m);
  seed[n_half] = std::polar(dimer.amplitude, dimer.theta);

  BreatherProfile profile;
  profile.params = params;
  profile.n_half = n_half;

  auto fail_from = [&](const detail::NewtonResult& r) -> Error {
    if (r.singular) {
      double gap = std::abs(std::abs(params.e_freq) - e0(params));
      if (gap <= 1e-3 * (1.0 + e0(params)))
        return Error(ErrorKind::near_bifurcation,
                     "singular Jacobian: e_freq too close to the branch endpoint e0");
      return Error(ErrorKind::continuation, "singular Jacobian during continuation");
    }
    return Error(ErrorKind::continuation,
                 "Newton did not converge; last residual " + std::to_string(r.residual));
  };

  detail::NewtonResult direct = detail::breather_newton(seed, params, tol);
  if (direct.converged) {
    profile.u = direct.u;
    profile.residual = direct.residual;
    profile.iterations = direct.iterations;
    return profile;
  }
  if (params.epsilon == 0.0) throw fail_from(direct);

  // Epsilon-stepping fallback.
  Params stage = params;
  double cur = 0.0;
  double step = params.epsilon / 4.0;
  Vec u = seed;
  int total_iters = direct.iterations;
  detail::NewtonResult last = direct;
  while (cur < params.epsilon) {
    stage.epsilon = std::min(cur + step, params.epsilon);
    detail::NewtonResult r = detail::breather_newton(u, stage, tol);
    total_iters += r.iterations;
    if (r.converged) {
      cur = stage.epsilon;
      u = r.u;
      step *= 1.5;
    } else {
      last = r;
      step *= 0.5;
      require(step >= 1e-6 * params.epsilon, ErrorKind::continuation,
              "continuation stalled; last residual " + std::to_string(last.residual));
      if (r.singular) throw fail_from(r);
    }
  }
  profile.u = u;
  profile.residual = stationary_residual(u, params).lpNorm<Eigen::Infinity>();
  profile.iterations = total_iters;
  return profile;
}

// Least-squares fit of log|U_n| against |n| over 2 <= |n| <= 6; for the continued
// breather the geometric rate exp(slope) tracks the coupling strength.
struct DecayFit {
  double slope = 0.0;
  double rate = 0.0;
  int n_points = 0;
};

inline DecayFit decay_fit(const BreatherProfile& profile, int n_lo = 2, int n_hi = 6) {
  require(profile.n_half >= n_hi, ErrorKind::validation, "lattice too small for decay window");
  require(n_lo >= 1 && n_hi > n_lo, ErrorKind::validation, "bad decay window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int n = n_lo; n <= n_hi; ++n) {
    for (int s : {-1, 1}) {
      double mag = std::abs(profile.at(s * n));
      require(mag > 0.0, ErrorKind::domain, "decay fit undefined on exactly zero tail");
      double x = n, y = std::log(mag);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
    }
  }
  DecayFit fit;
  fit.n_points = count;
  fit.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  fit.rate = std::exp(fit.slope);
  return fit;
}

// First-order piece a of the near-identity map between the breather and the
// decoupled dimer; solves the nonlinear system
//   E a_n delta_{n0} - Omega conj(a)_n - i gamma a_n - eps (L conj(a))_n
//   - 12|U_n|^2 conj(a)_n - 6(U_n^2 + conj(U)_n^2) a_n
//   - 6U_n(a_n^2 + conj(a)_n^2) - 12 conj(U)_n |a_n|^2 - 6|a_n|^2 conj(a)_n - 2a_n^3
//     = E U_n (1 - delta_{n0}).
struct CorrectionTerm {
  Vec a;
  double residual = 0.0;
  int iterations = 0;
};

inline Vec correction_residual(const Vec& a, const BreatherProfile& profile) {
  const Params& p = profile.params;
  int m = static_cast<int>(a.size());
  int center = (m - 1) / 2;
  Vec ab = a.conjugate();
  Vec lap = detail::laplacian(ab);
  Vec f(m);
  for (int i = 0; i < m; ++i) {
    Complex un = profile.u[i], ubn = std::conj(un);
    Complex an = a[i], abn = ab[i];
    double center_mask = (i == center) ? 1.0 : 0.0;
    f[i] = p.e_freq * an * center_mask - p.omega * abn - I * p.gamma * an -
           p.epsilon * lap[i] - 12.0 * std::norm(un) * abn - 6.0 * (un * un + ubn * ubn) * an -
           6.0 * un * (an * an + abn * abn) - 12.0 * ubn * std::norm(an) -
           6.0 * std::norm(an) * abn - 2.0 * an * an * an -
           p.e_freq * un * (1.0 - center_mask);
  }
  return f;
}

inline CorrectionTerm solve_correction(const BreatherProfile& profile, double tol = 1e-12) {
  require(tol > 0.0, ErrorKind::validation, "tol must be positive");
  const Params& p = profile.params;
  int m = static_cast<int>(profile.u.size());
  int center = (m - 1) / 2;
  auto resid = [&profile](const Vec& a) { return correction_residual(a, profile); };
  auto jacobian = [&](const Vec& a) {
    Vec a_diag(m), b_diag(m);
    for (int i = 0; i < m; ++i) {
      Complex un = profile.u[i], ubn = std::conj(un);
      Complex an = a[i], abn = std::conj(an);
      double center_mask = (i == center) ? 1.0 : 0.0;
      a_diag[i] = p.e_freq * center_mask - I * p.gamma - 6.0 * (un * un + ubn * ubn) -
                  12.0 * un * an - 12.0 * ubn * abn - 6.0 * abn * abn - 6.0 * an * an;
      b_diag[i] = -p.omega - 12.0 * std::norm(un) - 12.0 * un * abn - 12.0 * ubn * an -
                  12.0 * std::norm(an);
    }
    return detail::split_jacobian(a_diag, b_diag, -p.epsilon);
  };
  detail::NewtonResult r = detail::newton_complex(Vec::Zero(m), resid, jacobian, tol);
  require(r.converged, ErrorKind::continuation,
          "correction solve did not converge; last residual " + std::to_string(r.residual));
  CorrectionTerm corr;
  corr.a = r.u;
  corr.residual = r.residual;
  corr.iterations = r.iterations;
  return corr;
}

}  // namespace ptlat
