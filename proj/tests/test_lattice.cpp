#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ptlat/dimer.hpp"
#include "ptlat/dynamics.hpp"
#include "ptlat/lattice.hpp"
#include "ptlat/params.hpp"

using namespace ptlat;

namespace {

LatticeState single_site(int n_half, Complex u0, Complex v0) {
  LatticeState s = LatticeState::zero(n_half);
  s.u[s.idx(0)] = u0;
  s.v[s.idx(0)] = v0;
  return s;
}

LatticeState dimer_state(const Params& params) {
  DimerSolution d = dimer_solve(params);
  Complex u0 = std::polar(d.amplitude, d.theta);
  return single_site(3, u0, std::conj(u0));
}

}  // namespace

TEST_CASE("parameter validation") {
  Params p;
  REQUIRE_NOTHROW(p.validate());

  p.gamma = 0.0;
  REQUIRE_THROWS_AS(p.validate(), Error);
  p.gamma = -0.5;
  try {
    p.validate();
    FAIL("negative gamma accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    CHECK(e.exit_code() == 2);
  }

  p = Params{};
  p.omega = 0.0;
  REQUIRE_THROWS_AS(p.validate(), Error);

  p = Params{};
  p.epsilon = -1e-9;
  REQUIRE_THROWS_AS(p.validate(), Error);
}

TEST_CASE("zero-amplitude frequency e0") {
  Params p;  // omega 3/4, gamma 1/2
  // sqrt(9/16 - 4/16) = sqrt(5)/4
  CHECK(e0(p) == Catch::Approx(0.5590169943749475).epsilon(0).margin(1e-15));

  p.omega = -0.75;  // even in omega
  CHECK(e0(p) == Catch::Approx(0.5590169943749475).epsilon(0).margin(1e-15));

  p.omega = 0.4;  // |omega| <= gamma: broken regime
  try {
    e0(p);
    FAIL("e0 accepted |omega| <= gamma");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
    CHECK(e.exit_code() == 2);
  }
}

TEST_CASE("error kinds map to exit codes") {
  CHECK(exit_code(ErrorKind::validation) == 2);
  CHECK(exit_code(ErrorKind::invalid_state) == 2);
  CHECK(exit_code(ErrorKind::domain) == 2);
  CHECK(exit_code(ErrorKind::no_real_solution) == 3);
  CHECK(exit_code(ErrorKind::out_of_branch) == 3);
  CHECK(exit_code(ErrorKind::near_bifurcation) == 3);
  CHECK(exit_code(ErrorKind::continuation) == 3);
  CHECK(exit_code(ErrorKind::blow_up) == 3);
  CHECK(exit_code(ErrorKind::decomposition_failure) == 3);
  CHECK(exit_code(ErrorKind::invariant) == 4);
}

TEST_CASE("state validation rejects non-finite amplitudes") {
  LatticeState s = single_site(2, Complex{1, 0}, Complex{0, 0});
  REQUIRE_NOTHROW(s.validate());
  s.u[0] = Complex{std::numeric_limits<double>::infinity(), 0};
  try {
    s.validate();
    FAIL("non-finite state accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_state);
  }
}

TEST_CASE("rhs on hand-evaluated states") {
  Params p;
  p.epsilon = 0.0;

  SECTION("zero state is a fixed point") {
    LatticeState s = single_site(2, Complex{0, 0}, Complex{0, 0});
    StateDerivative d = rhs(s, p);
    CHECK(d.du.norm() == 0.0);
    CHECK(d.dv.norm() == 0.0);
  }

  SECTION("single excited site: du0/dt = gamma, dv0/dt = -i(omega + 2)") {
    LatticeState s = single_site(2, Complex{1, 0}, Complex{0, 0});
    StateDerivative d = rhs(s, p);
    CHECK(std::abs(d.du[s.idx(0)] - Complex{p.gamma, 0.0}) < 1e-15);
    CHECK(std::abs(d.dv[s.idx(0)] - Complex{0.0, -(p.omega + 2.0)}) < 1e-15);
    for (int n = -2; n <= 2; ++n) {
      if (n == 0) continue;
      CHECK(std::abs(d.du[s.idx(n)]) == 0.0);
      CHECK(std::abs(d.dv[s.idx(n)]) == 0.0);
    }
  }
}

TEST_CASE("energy on hand-evaluated states") {
  Params p;

  SECTION("zero state") {
    LatticeState s = single_site(2, Complex{0, 0}, Complex{0, 0});
    CHECK(energy_h(s, p) == 0.0);
  }

  SECTION("u0 = 1, v = 0: H = 1 + omega - 2 eps") {
    LatticeState s = single_site(2, Complex{1, 0}, Complex{0, 0});
    CHECK(energy_h(s, p) ==
          Catch::Approx(1.0 + p.omega - 2.0 * p.epsilon).epsilon(0).margin(1e-15));
  }

  SECTION("u0 = v0 = a real: H = 8a^4 + 2 omega a^2 - 4 eps a^2") {
    double a = 0.7;
    LatticeState s = single_site(2, Complex{a, 0}, Complex{a, 0});
    double expect = 8.0 * a * a * a * a + 2.0 * p.omega * a * a - 4.0 * p.epsilon * a * a;
    CHECK(energy_h(s, p) == Catch::Approx(expect).epsilon(0).margin(1e-14));
  }
}

TEST_CASE("charge on hand-evaluated states") {
  SECTION("zero and imaginary-orthogonal products") {
    CHECK(charge_q(single_site(2, Complex{0, 0}, Complex{0, 0})) == 0.0);
    CHECK(charge_q(single_site(2, Complex{1, 0}, Complex{0, 1})) == 0.0);
  }

  SECTION("decoupled dimer: Q = 2 A^2 E / (8 A^2 + omega)") {
    Params p;
    p.epsilon = 0.0;
    DimerSolution d = dimer_solve(p);
    LatticeState s = dimer_state(p);
    double x = d.amplitude * d.amplitude;
    double expect = 2.0 * x * p.e_freq / (8.0 * x + p.omega);
    CHECK(charge_q(s) == Catch::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("shifted energy lambda_e") {
  Params p;

  SECTION("zero state and empty center") {
    CHECK(lambda_e(single_site(2, Complex{0, 0}, Complex{0, 0}), p) == 0.0);
    LatticeState s = single_site(2, Complex{0, 0}, Complex{0, 0});
    s.u[s.idx(1)] = Complex{0.3, -0.4};
    s.v[s.idx(-2)] = Complex{0.1, 0.2};
    CHECK(lambda_e(s, p) == energy_h(s, p));
  }

  SECTION("decoupled dimer: Lambda_E = H - 2 E A^2 cos 2 theta") {
    Params p0;
    p0.epsilon = 0.0;
    DimerSolution d = dimer_solve(p0);
    LatticeState s = dimer_state(p0);
    double expect = energy_h(s, p0) -
                    2.0 * p0.e_freq * d.amplitude * d.amplitude * std::cos(2.0 * d.theta);
    CHECK(lambda_e(s, p0) == Catch::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("local charge flux") {
  detail::Gaussian gauss(31);
  LatticeState s = LatticeState::zero(4);
  for (int k = 0; k < s.size(); ++k) {
    s.u[k] = Complex{gauss(), gauss()};
    s.v[k] = Complex{gauss(), gauss()};
  }

  SECTION("vanishes when decoupled") {
    Params p;
    p.epsilon = 0.0;
    CHECK(local_charge_flux(s, p) == 0.0);
  }

  SECTION("vanishes when the neighbors are empty") {
    Params p;
    LatticeState t = s;
    for (int n : {-1, 1}) {
      t.u[t.idx(n)] = 0.0;
      t.v[t.idx(n)] = 0.0;
    }
    CHECK(std::abs(local_charge_flux(t, p)) < 1e-15);
  }

  SECTION("matches the rhs derivative of the central charge") {
    // d/dt (u0 conj(v0) + conj(u0) v0) evaluated through the flow
    Params p;
    StateDerivative d = rhs(s, p);
    int c = s.idx(0);
    Complex prod = d.du[c] * std::conj(s.v[c]) + s.u[c] * std::conj(d.dv[c]);
    double direct = 2.0 * prod.real();
    CHECK(local_charge_flux(s, p) == Catch::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("norm balance uses the derived 2 gamma coefficient") {
  Params p;
  detail::Gaussian gauss(32);

  SECTION("zero state") {
    CHECK(norm_balance_residual(single_site(2, Complex{0, 0}, Complex{0, 0}), p) == 0.0);
  }

  SECTION("balanced moduli freeze the norm") {
    LatticeState s = LatticeState::zero(3);
    for (int k = 0; k < s.size(); ++k) {
      double mag = 0.2 + 0.1 * k;
      s.u[k] = std::polar(mag, gauss());
      s.v[k] = std::polar(mag, gauss());
    }
    StateDerivative d = rhs(s, p);
    double dndt = 2.0 * (s.u.dot(d.du) + s.v.dot(d.dv)).real();
    CHECK(std::abs(dndt) < 1e-13);
  }

  SECTION("random states") {
    for (int trial = 0; trial < 50; ++trial) {
      LatticeState s = LatticeState::zero(5);
      for (int k = 0; k < s.size(); ++k) {
        s.u[k] = Complex{gauss(), gauss()};
        s.v[k] = Complex{gauss(), gauss()};
      }
      StateDerivative d = rhs(s, p);
      double dndt = 2.0 * (s.u.dot(d.du) + s.v.dot(d.dv)).real();
      CHECK(norm_balance_residual(s, p) < 1e-10 * (1.0 + std::abs(dndt)));
    }
  }
}

TEST_CASE("gauge rotation") {
  Params p;
  detail::Gaussian gauss(33);
  LatticeState s = LatticeState::zero(4);
  for (int k = 0; k < s.size(); ++k) {
    s.u[k] = Complex{gauss(), gauss()};
    s.v[k] = Complex{gauss(), gauss()};
  }

  SECTION("identity angles") {
    LatticeState r0 = gauge_rotate(s, 0.0);
    CHECK((r0.u - s.u).norm() == 0.0);
    LatticeState r2pi = gauge_rotate(s, 2.0 * M_PI);
    CHECK((r2pi.u - s.u).norm() < 1e-14 * s.u.norm());
    CHECK((r2pi.v - s.v).norm() < 1e-14 * s.v.norm());
  }

  SECTION("functionals are phase-invariant") {
    for (double alpha : {0.3, 1.7, -2.9}) {
      LatticeState r = gauge_rotate(s, alpha);
      CHECK(std::abs(energy_h(r, p) - energy_h(s, p)) <=
            1e-12 * (1.0 + std::abs(energy_h(s, p))));
      CHECK(std::abs(charge_q(r) - charge_q(s)) <= 1e-12 * (1.0 + std::abs(charge_q(s))));
      CHECK(std::abs(lambda_e(r, p) - lambda_e(s, p)) <=
            1e-12 * (1.0 + std::abs(lambda_e(s, p))));
    }
  }
}

TEST_CASE("parity swap") {
  SECTION("zero maps to zero") {
    LatticeState z = single_site(2, Complex{0, 0}, Complex{0, 0});
    CHECK(pt_apply(z).norm_sq() == 0.0);
  }

  SECTION("double application is the identity") {
    detail::Gaussian gauss(34);
    LatticeState s = LatticeState::zero(3);
    for (int k = 0; k < s.size(); ++k) {
      s.u[k] = Complex{gauss(), gauss()};
      s.v[k] = Complex{gauss(), gauss()};
    }
    LatticeState twice = pt_apply(pt_apply(s));
    CHECK((twice.u - s.u).norm() == 0.0);
    CHECK((twice.v - s.v).norm() == 0.0);
  }

  SECTION("symmetric states swap onto their conjugate") {
    Params p;
    p.epsilon = 0.0;
    LatticeState s = dimer_state(p);
    REQUIRE(s.is_pt_symmetric());
    LatticeState swapped = pt_apply(s);
    CHECK((swapped.u - s.u.conjugate()).norm() < 1e-15);
  }
}

TEST_CASE("pt predicate") {
  LatticeState s = LatticeState::zero(2);
  s.u[s.idx(-1)] = Complex{0.4, 0.1};
  s.u[s.idx(0)] = Complex{0.9, -0.2};
  s.u[s.idx(1)] = Complex{0.4, 0.1};
  s.v = s.u.conjugate();
  CHECK(s.is_pt_symmetric());

  s.u[s.idx(1)] += Complex{1e-3, 0};
  CHECK_FALSE(s.is_pt_symmetric());
}

TEST_CASE("zero padding is exact") {
  Params p;
  detail::Gaussian gauss(35);
  LatticeState small = LatticeState::zero(4);
  for (int k = 0; k < small.size(); ++k) {
    small.u[k] = Complex{gauss(), gauss()};
    small.v[k] = Complex{gauss(), gauss()};
  }
  LatticeState big = LatticeState::zero(9);
  int off = big.n_half - small.n_half;
  for (int k = 0; k < small.size(); ++k) {
    big.u[off + k] = small.u[k];
    big.v[off + k] = small.v[k];
  }

  CHECK(energy_h(big, p) == energy_h(small, p));
  CHECK(charge_q(big) == charge_q(small));
  StateDerivative ds = rhs(small, p), db = rhs(big, p);
  for (int k = 0; k < small.size(); ++k) {
    CHECK(db.du[off + k] == ds.du[k]);
    CHECK(db.dv[off + k] == ds.dv[k]);
  }
}

TEST_CASE("diagnostics snapshot") {
  Params p;
  LatticeState s = single_site(2, Complex{1, 0}, Complex{0, 0});
  DiagnosticRecord rec = diagnostics(s, p, 2.5);
  CHECK(rec.t == 2.5);
  CHECK(rec.energy_h == energy_h(s, p));
  CHECK(rec.charge_q == charge_q(s));
  CHECK(rec.lambda_e == lambda_e(s, p));
  CHECK(rec.norm_sq == 1.0);
  CHECK(rec.local_charge == 0.0);
}
