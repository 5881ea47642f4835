#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ptlat/breather.hpp"
#include "ptlat/error.hpp"
#include "ptlat/expansion.hpp"
#include "ptlat/hessian.hpp"
#include "ptlat/lattice.hpp"
#include "ptlat/params.hpp"

namespace ptlat {

// Classical fourth-order Runge-Kutta step of the lattice flow; deterministic.
inline LatticeState step_rk4(const LatticeState& state, const Params& params, double dt) {
  require(dt > 0.0 && std::isfinite(dt), ErrorKind::validation, "dt must be positive");
  auto axpy = [&](const LatticeState& s, const StateDerivative& d, double a) {
    LatticeState stage{s.n_half, s.u + a * d.du, s.v + a * d.dv};
    // entry state is validated by the caller; a non-finite stage is divergence
    require(stage.u.allFinite() && stage.v.allFinite(), ErrorKind::blow_up,
            "state became non-finite during a time step");
    return stage;
  };
  StateDerivative k1 = rhs(state, params);
  StateDerivative k2 = rhs(axpy(state, k1, 0.5 * dt), params);
  StateDerivative k3 = rhs(axpy(state, k2, 0.5 * dt), params);
  StateDerivative k4 = rhs(axpy(state, k3, dt), params);
  LatticeState out{state.n_half,
                   state.u + (dt / 6.0) * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du),
                   state.v + (dt / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv)};
  require(out.u.allFinite() && out.v.allFinite(), ErrorKind::blow_up,
          "state became non-finite during a time step");
  return out;
}

// Default step resolving the fastest linear and nonlinear frequencies of the state.
inline double default_dt(const Params& params, const LatticeState& state0) {
  double scale = std::min(
      1.0, std::min(1.0 / (std::abs(params.e_freq) + 1e-300),
                    1.0 / (std::abs(params.omega) + state0.norm_sq() + 1e-300)));
  return 0.01 * scale;
}

struct Trajectory {
  std::vector<DiagnosticRecord> records;
  std::vector<LatticeState> states;  // sampled at the record cadence
  double dt = 0.0;                   // actual step used
  double t_end = 0.0;

  double drift_h() const {
    if (records.empty()) return 0.0;
    double h0 = records.front().energy_h, worst = 0.0;
    for (const auto& r : records) worst = std::max(worst, std::abs(r.energy_h - h0));
    return worst / (1.0 + std::abs(h0));
  }
  double drift_q() const {
    if (records.empty()) return 0.0;
    double q0 = records.front().charge_q, worst = 0.0;
    for (const auto& r : records) worst = std::max(worst, std::abs(r.charge_q - q0));
    return worst / (1.0 + std::abs(q0));
  }
};

// Integrates to t_end, sampling diagnostics every `cadence` time units (snapped
// to a whole number of steps). The optional observer sees every sample.
inline Trajectory integrate(
    const LatticeState& state0, const Params& params, double t_end, double dt,
    double cadence = 0.5,
    const std::function<void(double, const LatticeState&)>& observer = nullptr) {
  state0.validate();
  require(t_end > 0.0 && std::isfinite(t_end), ErrorKind::validation, "t_end must be positive");
  require(dt > 0.0 && dt <= t_end, ErrorKind::validation, "need 0 < dt <= t_end");
  require(cadence > 0.0, ErrorKind::validation, "cadence must be positive");

  long long total_steps = std::llround(std::ceil(t_end / dt - 1e-12));
  double dt_eff = t_end / static_cast<double>(total_steps);
  long long per_record = std::max(1LL, std::llround(cadence / dt_eff));

  Trajectory traj;
  traj.dt = dt_eff;
  traj.t_end = t_end;
  LatticeState state = state0;
  auto record = [&](double t, const LatticeState& s) {
    traj.records.push_back(diagnostics(s, params, t));
    traj.states.push_back(s);
    if (observer) observer(t, s);
  };
  record(0.0, state);
  for (long long step = 1; step <= total_steps; ++step) {
    double t = dt_eff * static_cast<double>(step);
    try {
      state = step_rk4(state, params, dt_eff);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::blow_up)
        fail(ErrorKind::blow_up, "blow-up at t = " + std::to_string(t));
      throw;
    }
    if (step % per_record == 0 || step == total_steps) record(t, state);
  }
  return traj;
}

// Integration with the energy drift as accuracy monitor: the step is halved
// until the relative H drift over the whole run is below `drift_tol`.
inline Trajectory integrate_gated(const LatticeState& state0, const Params& params,
                                  double t_end, double dt0, double cadence = 0.5,
                                  double drift_tol = 1e-8) {
  double dt = dt0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Trajectory traj = integrate(state0, params, t_end, dt, cadence);
    if (traj.drift_h() < drift_tol) return traj;
    dt *= 0.5;
  }
  fail(ErrorKind::invariant, "energy drift persists at the smallest gated step");
}

// Phase modulation psi = e^{-i alpha sigma}(Phi + phi) with phi orthogonal to the
// gauge mode sigma Phi; alpha is found from f(alpha) = <sigma Phi, e^{i alpha} psi - Phi> = 0.
struct ModulationState {
  double alpha = 0.0;
  LatticeState phi;             // conjugate-consistent perturbation (du, dv)
  double ortho_residual = 0.0;  // |<sigma Phi, phi>| in the 4-component pairing
};

inline ModulationState modulation_decompose(const LatticeState& state,
                                            const BreatherProfile& profile,
                                            double nu0_fraction = 0.6) {
  state.validate();
  require(state.n_half == profile.n_half, ErrorKind::validation,
          "state must live on the profile lattice");
  LatticeState base = profile.to_state();
  double base_sq = base.norm_sq();
  require(base_sq > 0.0, ErrorKind::invalid_state, "zero profile has no phase orbit");

  // <Phi, psi> in the plain 2-component pairing; ||phi(alpha)||^2 =
  // ||psi||^2 + ||Phi||^2 - 2 Re(e^{i alpha} z).
  Complex z = base.u.dot(state.u) + base.v.dot(state.v);
  double state_sq = state.norm_sq();

  double best_alpha = 0.0, best_re = -1e300;
  for (int j = 0; j < 64; ++j) {
    double a = 2.0 * M_PI * j / 64.0 - M_PI;
    double re = std::real(std::exp(I * a) * z);
    if (re > best_re) {
      best_re = re;
      best_alpha = a;
    }
  }
  double d_min_sq = state_sq + base_sq - 2.0 * std::abs(z);
  double nu0 = nu0_fraction * std::sqrt(base_sq);
  require(d_min_sq <= nu0 * nu0, ErrorKind::decomposition_failure,
          "orbit too far from the breather for a modulation decomposition");

  // Scalar Newton on f(alpha) = Im(e^{i alpha} z); the scan seed selects the
  // minimal-norm root, where f' = Re(e^{i alpha} z) > 0.
  double alpha = best_alpha;
  for (int it = 0; it < 60; ++it) {
    Complex w = std::exp(I * alpha) * z;
    double f = w.imag(), fp = w.real();
    if (std::abs(f) <= 1e-15 * (1.0 + std::abs(z))) break;
    require(fp > 0.0, ErrorKind::decomposition_failure,
            "modulation Newton left the minimal-norm basin");
    alpha -= f / fp;
  }
  if (alpha > M_PI) alpha -= 2.0 * M_PI;
  if (alpha <= -M_PI) alpha += 2.0 * M_PI;

  ModulationState mod;
  mod.alpha = alpha;
  LatticeState rotated = gauge_rotate(state, alpha);
  mod.phi = LatticeState{state.n_half, rotated.u - base.u, rotated.v - base.v};
  mod.ortho_residual = 2.0 * std::abs(std::imag(std::exp(I * alpha) * z));
  return mod;
}

// Gradient of the shifted energy H - E Q in the 4-component layout
// (dH/d conj u, dH/du, dH/d conj v, dH/dv per site), obtained through the
// cross-gradient structure: i du/dt = dH/d conj v, i dv/dt = dH/d conj u.
inline Eigen::VectorXcd energy_gradient(const LatticeState& state, const Params& params) {
  StateDerivative d = rhs(state, params);
  int m = state.size();
  Eigen::VectorXcd g(4 * m);
  for (int k = 0; k < m; ++k) {
    Complex g1 = I * d.dv[k] - params.e_freq * state.v[k];
    Complex g3 = I * d.du[k] - params.e_freq * state.u[k];
    g[4 * k + 0] = g1;
    g[4 * k + 1] = std::conj(g1);
    g[4 * k + 2] = g3;
    g[4 * k + 3] = std::conj(g3);
  }
  return g;
}

// Modulation phase velocity. Differentiating the fit constraint
// Im<Phi, e^{i alpha} psi> = 0 along the flow and splitting the shifted
// gradient at Phi + phi into its linear and superlinear parts gives
//   alpha_dot - E = [<S Phi, H'' phi> + <S Phi, N(phi)>] / [||Phi||^2 + Re<Phi, phi>]
// in the 4-component pairing, where S swaps the two fields (the cross-gradient
// structure pairs the u-equation with v-derivatives) and N is the superlinear
// remainder of the gradient. Both terms pair with the swapped profile; the
// pairing is real by conjugation structure, asserted not assumed.
inline double alpha_dot_eval(const BreatherProfile& profile, const ModulationState& mod,
                             const Params& params) {
  LatticeState base = profile.to_state();
  Eigen::VectorXcd phi4 = four_component(mod.phi);
  Eigen::VectorXcd base4 = four_component(base);
  Eigen::VectorXcd swapped = four_component(pt_apply(base));  // (V, conj V, U, conj U)

  HessianMatrix h = assemble_hessian(profile, HessianKind::extended);
  LatticeState shifted{base.n_half, base.u + mod.phi.u, base.v + mod.phi.v};
  Eigen::VectorXcd remainder = energy_gradient(shifted, params) -
                               energy_gradient(base, params) - h.entries * phi4;

  double scale = base4.norm() * (1.0 + phi4.norm());
  double numerator = detail::take_real(swapped.dot(h.entries * phi4), scale, "alpha_dot linear") +
                     detail::take_real(swapped.dot(remainder), scale, "alpha_dot remainder");
  double denominator = base4.squaredNorm() +
                       detail::take_real(base4.dot(phi4), scale, "alpha_dot denominator");
  require(denominator >= 0.1 * base4.squaredNorm(), ErrorKind::near_degenerate_decomposition,
          "modulation denominator nearly vanishes");
  return params.e_freq + numerator / denominator;
}

// Drift audit of the Lyapunov difference Delta(t) along a trajectory: the
// pointwise rate bound |dDelta/dt| <= C eps (eps + sum of local residual norms
// and squares at sites 0, +-1), and the integrated envelope
//   Delta(t) - Delta0 <= e^{C eps t / a} (Delta(0) - Delta0 + a(eps + a))
// for the two scale choices a = eps and a = sqrt(eps).
struct DeltaRateReport {
  double c_rate = 0.0;          // fitted constant of the pointwise bound
  double max_rate = 0.0;        // max |dDelta/dt| over interior samples
  double delta0 = 0.0;          // expansion value at the correction term
  double delta_init = 0.0;      // Delta at t = 0
  bool envelope_ok_eps = false;
  bool envelope_ok_sqrt_eps = false;
  int n_samples = 0;
};

inline DeltaRateReport delta_rate_check(const Trajectory& traj, const BreatherProfile& profile,
                                        const CorrectionTerm& correction, const Params& params) {
  require(traj.records.size() == traj.states.size() && traj.records.size() >= 3,
          ErrorKind::validation, "trajectory must carry at least three sampled states");
  LatticeState base = profile.to_state();
  double lambda_base = lambda_e(base, params);
  double eps = params.epsilon;

  int center = profile.n_half;
  std::vector<double> delta(traj.records.size());
  std::vector<double> bound(traj.records.size());
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    delta[i] = traj.records[i].lambda_e - lambda_base;  // gauge-invariant
    ModulationState mod = modulation_decompose(traj.states[i], profile);
    double local = 0.0;
    for (int n : {0, 1, -1}) {
      if (std::abs(n) > profile.n_half) continue;
      int k = center + n;
      Complex du = mod.phi.u[k] - correction.a[k];
      Complex dv = mod.phi.v[k] - std::conj(correction.a[k]);
      double block = std::sqrt(2.0 * (std::norm(du) + std::norm(dv)));
      local += block + block * block;
    }
    bound[i] = eps * (eps + local);
  }

  DeltaRateReport rep;
  rep.n_samples = static_cast<int>(traj.records.size());
  rep.delta0 = delta_zero(profile, correction, params);
  rep.delta_init = delta.front();

  double c_fit = 0.0, max_rate = 0.0;
  for (std::size_t i = 1; i + 1 < delta.size(); ++i) {
    double h = traj.records[i + 1].t - traj.records[i - 1].t;
    double rate = std::abs((delta[i + 1] - delta[i - 1]) / h);
    max_rate = std::max(max_rate, rate);
    if (bound[i] > 0.0) c_fit = std::max(c_fit, rate / bound[i]);
  }
  rep.c_rate = c_fit;
  rep.max_rate = max_rate;

  auto envelope_holds = [&](double a) {
    if (a <= 0.0) return true;
    double inflow = rep.delta_init - rep.delta0 + a * (eps + a);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      double env = std::exp(rep.c_rate * eps * traj.records[i].t / a) * inflow;
      if (delta[i] - rep.delta0 > env * (1.0 + 1e-9) + 1e-14) return false;
    }
    return true;
  };
  rep.envelope_ok_eps = eps == 0.0 || envelope_holds(eps);
  rep.envelope_ok_sqrt_eps = eps == 0.0 || envelope_holds(std::sqrt(eps));
  return rep;
}

namespace detail {

// Deterministic standard normals from raw mt19937_64 output (Box-Muller);
// avoids the implementation-defined std::normal_distribution.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  double uniform() {
    // in (0, 1]: guard the log above from u1 = 0
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace detail

// Random conjugate-structure-free perturbation of unit norm, orthogonal to the
// gauge mode of the profile (the constrained subspace of the stability theory).
inline LatticeState random_constrained_perturbation(const BreatherProfile& profile,
                                                    std::uint64_t seed) {
  int m = 2 * profile.n_half + 1;
  detail::Gaussian gauss(seed);
  Vec du(m), dv(m);
  for (int k = 0; k < m; ++k) du[k] = Complex{gauss(), gauss()};
  for (int k = 0; k < m; ++k) dv[k] = Complex{gauss(), gauss()};
  LatticeState base = profile.to_state();
  // Remove the gauge component: phi -= i Im<Phi, phi> Phi / ||Phi||^2.
  Complex overlap = base.u.dot(du) + base.v.dot(dv);
  Complex coef = I * overlap.imag() / base.norm_sq();
  du -= coef * base.u;
  dv -= coef * base.v;
  double norm = std::sqrt(du.squaredNorm() + dv.squaredNorm());
  require(norm > 0.0, ErrorKind::invalid_state, "degenerate random perturbation");
  return {profile.n_half, du / norm, dv / norm};
}

struct MetastabilityReport {
  std::vector<double> epsilons;
  double delta_init = 0.0;
  double nu_exit = 0.0;
  std::vector<double> t0_measured;    // first exit times (t_max when no exit)
  std::vector<bool> exited;           // whether the run actually crossed nu
  std::vector<double> max_alpha_dev;  // max |alpha_dot - E| per run
  std::vector<double> max_phi_norm;   // max ||phi|| per run
  double scaling_exponent = 0.0;      // slope of log t0 vs log eps (exited runs)
  double exponent_stderr = 0.0;
  bool inconclusive = false;          // no run exited before t_max
  double t_max = 0.0;
};

// Perturbs the continued breather at each coupling value with the same seeded
// noise of norm delta, integrates, and records the first time the decomposed
// perturbation norm crosses nu_exit.
inline MetastabilityReport metastability_sweep(const Params& params_base,
                                               const std::vector<double>& epsilons,
                                               double delta, double nu_exit, double t_max,
                                               int n_half = 20, std::uint64_t seed = 20240817,
                                               double cadence = 0.5) {
  require(!epsilons.empty(), ErrorKind::validation, "need at least one epsilon");
  require(delta > 0.0 && nu_exit > delta, ErrorKind::validation, "need 0 < delta < nu_exit");
  require(t_max > 0.0, ErrorKind::validation, "t_max must be positive");

  MetastabilityReport rep;
  rep.epsilons = epsilons;
  rep.delta_init = delta;
  rep.nu_exit = nu_exit;
  rep.t_max = t_max;

  for (double eps : epsilons) {
    Params p = params_base;
    p.epsilon = eps;
    BreatherProfile profile = solve_breather(p, n_half);
    LatticeState direction = random_constrained_perturbation(profile, seed);
    LatticeState base = profile.to_state();
    LatticeState state{base.n_half, base.u + delta * direction.u, base.v + delta * direction.v};

    double dt = default_dt(p, state);
    long long per_record = std::max(1LL, std::llround(cadence / dt));
    dt = cadence / static_cast<double>(per_record);
    long long total_steps = std::llround(t_max / dt);

    double t_exit = t_max;
    bool exited = false;
    double max_dev = 0.0, max_phi = 0.0;
    auto inspect = [&](double t, const LatticeState& s) {
      ModulationState mod;
      try {
        mod = modulation_decompose(s, profile);
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::decomposition_failure) {
          // the orbit left the decomposition basin entirely: an exit
          t_exit = t;
          exited = true;
          return;
        }
        throw;
      }
      double phi_norm = std::sqrt(mod.phi.norm_sq());
      max_phi = std::max(max_phi, phi_norm);
      max_dev = std::max(max_dev,
                         std::abs(alpha_dot_eval(profile, mod, p) - p.e_freq));
      if (phi_norm > nu_exit) {
        t_exit = t;
        exited = true;
      }
    };
    inspect(0.0, state);
    for (long long step = 1; step <= total_steps && !exited; ++step) {
      state = step_rk4(state, p, dt);
      if (step % per_record == 0) inspect(dt * static_cast<double>(step), state);
    }
    rep.t0_measured.push_back(t_exit);
    rep.exited.push_back(exited);
    rep.max_alpha_dev.push_back(max_dev);
    rep.max_phi_norm.push_back(max_phi);
  }

  // log-log fit over runs that exited at positive coupling
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (epsilons[i] > 0.0 && rep.exited[i] && rep.t0_measured[i] > 0.0) {
      xs.push_back(std::log(epsilons[i]));
      ys.push_back(std::log(rep.t0_measured[i]));
    }
  }
  rep.inconclusive = xs.empty();
  if (xs.size() >= 2) {
    double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, sres = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    double slope = sxy / sxx;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double r = ys[i] - my - slope * (xs[i] - mx);
      sres += r * r;
    }
    rep.scaling_exponent = slope;
    rep.exponent_stderr =
        xs.size() > 2 ? std::sqrt(sres / ((n - 2.0) * sxx)) : 0.0;
  }
  return rep;
}

}  // namespace ptlat
