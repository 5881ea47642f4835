#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "ptlat/error.hpp"
#include "ptlat/params.hpp"

namespace ptlat {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;

constexpr Complex I{0.0, 1.0};

// Dynamical state psi = (u, v) on sites -n_half..n_half.
// Exterior sites (|n| > n_half) are implicitly zero (Dirichlet truncation).
struct LatticeState {
  int n_half = 0;
  Vec u;
  Vec v;

  LatticeState() = default;
  LatticeState(int nh, Vec uu, Vec vv) : n_half(nh), u(std::move(uu)), v(std::move(vv)) {}

  static LatticeState zero(int n_half) {
    int m = 2 * n_half + 1;
    return {n_half, Vec::Zero(m), Vec::Zero(m)};
  }

  int size() const { return 2 * n_half + 1; }
  // Array index of lattice site n in -n_half..n_half.
  int idx(int n) const { return n + n_half; }
  Complex& at_u(int n) { return u[idx(n)]; }
  Complex& at_v(int n) { return v[idx(n)]; }
  Complex at_u(int n) const { return u[idx(n)]; }
  Complex at_v(int n) const { return v[idx(n)]; }

  double norm_sq() const { return u.squaredNorm() + v.squaredNorm(); }

  void validate() const {
    require(n_half >= 0, ErrorKind::invalid_state, "n_half must be nonnegative");
    require(u.size() == size() && v.size() == size(), ErrorKind::invalid_state,
            "state arrays must have length 2*n_half+1");
    require(u.allFinite() && v.allFinite(), ErrorKind::invalid_state,
            "state amplitudes must be finite");
  }

  // v_n = conj(u_n) and u_{-n} = u_n, within tol relative to the state norm.
  bool is_pt_symmetric(double tol = 1e-10) const {
    double scale = std::sqrt(norm_sq()) + 1e-300;
    double dev = (v - u.conjugate()).norm();
    double mirror = (u - u.reverse()).norm();
    return dev <= tol * scale && mirror <= tol * scale;
  }
};

// Scalar diagnostics sampled along a trajectory.
struct DiagnosticRecord {
  double t = 0.0;
  double energy_h = 0.0;
  double charge_q = 0.0;
  double lambda_e = 0.0;
  double norm_sq = 0.0;
  double local_charge = 0.0;
};

namespace detail {

// Asserts the accumulated imaginary residue of a nominally real functional
// is negligible, then discards it.
inline double take_real(Complex z, double scale, const char* what) {
  require(std::abs(z.imag()) <= 1e-12 * (1.0 + scale + std::abs(z.real())),
          ErrorKind::invariant, std::string(what) + ": imaginary residue too large");
  return z.real();
}

// Discrete Laplacian with zero exterior values.
inline Vec laplacian(const Vec& x) {
  int m = static_cast<int>(x.size());
  Vec out(m);
  for (int i = 0; i < m; ++i) {
    Complex left = (i > 0) ? x[i - 1] : Complex{0.0};
    Complex right = (i + 1 < m) ? x[i + 1] : Complex{0.0};
    out[i] = left - 2.0 * x[i] + right;
  }
  return out;
}

}  // namespace detail

// Time derivative (du/dt, dv/dt) of the gain/loss lattice:
//   du_n/dt = -i[eps(v_{n+1}-2v_n+v_{n-1}) + Omega v_n + 2((2|u_n|^2+|v_n|^2)v_n + u_n^2 conj(v_n))] + gamma u_n
//   dv_n/dt = -i[eps(u_{n+1}-2u_n+u_{n-1}) + Omega u_n + 2((2|v_n|^2+|u_n|^2)u_n + v_n^2 conj(u_n))] - gamma v_n
struct StateDerivative {
  Vec du;
  Vec dv;
};

inline StateDerivative rhs(const LatticeState& state, const Params& params) {
  state.validate();
  int m = state.size();
  Vec lap_u = detail::laplacian(state.u);
  Vec lap_v = detail::laplacian(state.v);
  StateDerivative d{Vec(m), Vec(m)};
  for (int i = 0; i < m; ++i) {
    Complex un = state.u[i], vn = state.v[i];
    double au2 = std::norm(un), av2 = std::norm(vn);
    Complex fu = params.epsilon * lap_v[i] + params.omega * vn +
                 2.0 * ((2.0 * au2 + av2) * vn + un * un * std::conj(vn));
    Complex fv = params.epsilon * lap_u[i] + params.omega * un +
                 2.0 * ((2.0 * av2 + au2) * un + vn * vn * std::conj(un));
    d.du[i] = -I * fu + params.gamma * un;
    d.dv[i] = -I * fv - params.gamma * vn;
  }
  return d;
}

// Conserved energy
//   H = sum_n (|u_n|^2+|v_n|^2)^2 + (u_n conj(v_n) + conj(u_n) v_n)^2 + Omega(|u_n|^2+|v_n|^2)
//       - eps|u_{n+1}-u_n|^2 - eps|v_{n+1}-v_n|^2 + i gamma (u_n conj(v_n) - conj(u_n) v_n)
// with coupling differences taken over all edges to the zero exterior.
inline double energy_h(const LatticeState& state, const Params& params) {
  state.validate();
  int m = state.size();
  Complex acc{0.0};
  for (int i = 0; i < m; ++i) {
    Complex un = state.u[i], vn = state.v[i];
    double p = std::norm(un) + std::norm(vn);
    Complex cross = un * std::conj(vn) + std::conj(un) * vn;
    acc += p * p + cross * cross + params.omega * p;
    acc += I * params.gamma * (un * std::conj(vn) - std::conj(un) * vn);
  }
  for (int i = 0; i <= m; ++i) {
    Complex ul = (i > 0) ? state.u[i - 1] : Complex{0.0};
    Complex ur = (i < m) ? state.u[i] : Complex{0.0};
    Complex vl = (i > 0) ? state.v[i - 1] : Complex{0.0};
    Complex vr = (i < m) ? state.v[i] : Complex{0.0};
    acc -= params.epsilon * (std::norm(ur - ul) + std::norm(vr - vl));
  }
  return detail::take_real(acc, state.norm_sq(), "energy_h");
}

// Conserved gauge charge Q = sum_n (u_n conj(v_n) + conj(u_n) v_n).
inline double charge_q(const LatticeState& state) {
  state.validate();
  Complex acc{0.0};
  for (int i = 0; i < state.size(); ++i)
    acc += state.u[i] * std::conj(state.v[i]) + std::conj(state.u[i]) * state.v[i];
  return detail::take_real(acc, state.norm_sq(), "charge_q");
}

// Central-site charge u_0 conj(v_0) + conj(u_0) v_0.
inline double local_charge(const LatticeState& state) {
  Complex u0 = state.at_u(0), v0 = state.at_v(0);
  return detail::take_real(u0 * std::conj(v0) + std::conj(u0) * v0, state.norm_sq(),
                           "local_charge");
}

// Gauge-invariant energy Lambda_E = H - E (u_0 conj(v_0) + conj(u_0) v_0).
inline double lambda_e(const LatticeState& state, const Params& params) {
  return energy_h(state, params) - params.e_freq * local_charge(state);
}

// Time derivative of the central-site charge along the flow:
//   d/dt(u_0 conj(v_0) + c.c.) = -i eps [conj(u_0)(u_1+u_{-1}) - u_0(conj(u_1)+conj(u_{-1}))
//                                        + conj(v_0)(v_1+v_{-1}) - v_0(conj(v_1)+conj(v_{-1}))]
inline double local_charge_flux(const LatticeState& state, const Params& params) {
  state.validate();
  require(state.n_half >= 1, ErrorKind::validation, "local_charge_flux needs n_half >= 1");
  Complex u0 = state.at_u(0), v0 = state.at_v(0);
  Complex us = state.at_u(1) + state.at_u(-1);
  Complex vs = state.at_v(1) + state.at_v(-1);
  Complex acc = -I * params.epsilon *
                (std::conj(u0) * us - u0 * std::conj(us) + std::conj(v0) * vs - v0 * std::conj(vs));
  return detail::take_real(acc, state.norm_sq(), "local_charge_flux");
}

// Residual of the norm balance law d/dt(
//   ||u||^2 + ||v||^2) = 2 gamma sum_n (|u_n|^2 - |v_n|^2),
// with the left side evaluated through rhs. Zero to round-off for every state.
inline double norm_balance_residual(const LatticeState& state, const Params& params) {
  StateDerivative d = rhs(state, params);
  double lhs = 0.0, imbalance = 0.0;
  for (int i = 0; i < state.size(); ++i) {
    lhs += 2.0 * std::real(std::conj(state.u[i]) * d.du[i]) +
           2.0 * std::real(std::conj(state.v[i]) * d.dv[i]);
    imbalance += std::norm(state.u[i]) - std::norm(state.v[i]);
  }
  return lhs - 2.0 * params.gamma * imbalance;
}

// Phase rotation (u, v) -> e^{i alpha} (u, v); H, Q, Lambda_E are invariant.
inline LatticeState gauge_rotate(const LatticeState& state, double alpha) {
  Complex phase = std::exp(I * alpha);
  return {state.n_half, phase * state.u, phase * state.v};
}

// Parity swap u <-> v; pass conjugate = true to compose with the antilinear part
// (time reversal itself is handled at trajectory level).
inline LatticeState pt_apply(const LatticeState& state, bool conjugate = false) {
  if (conjugate) return {state.n_half, state.v.conjugate(), state.u.conjugate()};
  return {state.n_half, state.v, state.u};
}

inline DiagnosticRecord diagnostics(const LatticeState& state, const Params& params, double t) {
  DiagnosticRecord rec;
  rec.t = t;
  rec.energy_h = energy_h(state, params);
  rec.charge_q = charge_q(state);
  rec.lambda_e = rec.energy_h - params.e_freq * local_charge(state);
  rec.norm_sq = state.norm_sq();
  rec.local_charge = local_charge(state);
  return rec;
}

}  // namespace ptlat
