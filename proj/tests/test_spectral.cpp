#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ptlat/breather.hpp"
#include "ptlat/dimer.hpp"
#include "ptlat/hessian.hpp"

using namespace ptlat;

namespace {

std::vector<double> sorted_block_eigs(Complex u_site, double e_coef, const Params& p) {
  Eigen::Matrix4cd block = detail::hessian_block(u_site, e_coef, p.omega, p.gamma);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(block, Eigen::EigenvaluesOnly);
  Eigen::Vector4d ev = solver.eigenvalues();
  return {ev[0], ev[1], ev[2], ev[3]};
}

}  // namespace

TEST_CASE("center block eigenvalues on the dimer branch") {
  Params p;

  SECTION("frozen values at the reference amplitude") {
    auto mu = dimer_block_eigenvalues(p, 0.5);
    CHECK(mu[0] == 0.0);
    CHECK(mu[1] == Catch::Approx(3.5).epsilon(0).margin(1e-14));
    CHECK(mu[2] == Catch::Approx(4.30443481).epsilon(0).margin(5e-9));
    CHECK(mu[3] == Catch::Approx(3.19556519).epsilon(0).margin(5e-9));
  }

  SECTION("closed form matches direct diagonalization along the branch") {
    for (int i = 1; i <= 50; ++i) {
      double amp = 2.0 * i / 50.0;
      Params q = p;
      q.e_freq = dimer_branch_e(amp, q);
      DimerSolution sol = dimer_solve(q);
      auto mu = dimer_block_eigenvalues(q, amp);
      std::vector<double> closed{mu[0], mu[1], mu[2], mu[3]};
      std::sort(closed.begin(), closed.end());
      std::vector<double> numeric =
          sorted_block_eigs(std::polar(sol.amplitude, sol.theta), q.e_freq, q);
      for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(closed[j] - numeric[j]) < 1e-10);
      }
      CHECK(mu[1] > 0.0);
      CHECK(mu[2] > 0.0);
      CHECK(mu[3] > 0.0);
    }
  }

  SECTION("empty site block carries the linear frequencies twice") {
    std::vector<double> numeric = sorted_block_eigs(Complex{0.0, 0.0}, 0.0, p);
    CHECK(numeric[0] == Catch::Approx(0.25).epsilon(0).margin(1e-14));
    CHECK(numeric[1] == Catch::Approx(0.25).epsilon(0).margin(1e-14));
    CHECK(numeric[2] == Catch::Approx(1.25).epsilon(0).margin(1e-14));
    CHECK(numeric[3] == Catch::Approx(1.25).epsilon(0).margin(1e-14));
  }

  SECTION("amplitude off the nonlinear branch is rejected") {
    REQUIRE_THROWS_AS(dimer_block_eigenvalues(p, -0.5), Error);
    REQUIRE_THROWS_AS(dimer_block_eigenvalues(p, 0.0), Error);
  }
}

TEST_CASE("assembled second-variation matrices") {
  Params p;
  BreatherProfile prof = solve_breather(p, 8);

  SECTION("both kinds are Hermitian") {
    for (HessianKind kind : {HessianKind::extended, HessianKind::modified}) {
      HessianMatrix h = assemble_hessian(prof, kind);
      REQUIRE(h.dim == 4 * (2 * 8 + 1));
      CHECK((h.entries - h.entries.adjoint()).norm() == 0.0);
    }
  }

  SECTION("the gauge mode spans the kernel of the extended kind") {
    CHECK(kernel_residual(prof) < 1e-12);
  }

  SECTION("decoupled spectrum is the union of site blocks") {
    Params q = p;
    q.epsilon = 0.0;
    BreatherProfile bare = solve_breather(q, 2);
    Eigen::VectorXd spec = hessian_spectrum(bare, HessianKind::modified);
    REQUIRE(spec.size() == 20);
    // center {0, mu1, mu2, mu3} plus (omega +- gamma) twice per empty site
    std::vector<double> expected{0.0, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 1.25,
                                 1.25, 1.25, 1.25, 1.25, 1.25, 1.25, 1.25, 3.19556519,
                                 3.5, 4.30443481};
    for (int j = 0; j < 20; ++j) {
      CHECK(std::abs(spec[j] - expected[j]) < 5e-9);
    }
  }
}

TEST_CASE("coercivity of the constrained operator") {
  Params p;

  SECTION("decoupled limit hits the band edge exactly") {
    Params q = p;
    q.epsilon = 0.0;
    double c2 = coercivity_on_constrained(solve_breather(q, 12));
    CHECK(c2 == Catch::Approx(0.25).epsilon(0).margin(1e-10));
  }

  SECTION("frozen values under weak coupling") {
    struct Row {
      double eps, c2;
    };
    for (Row row : {Row{0.02, 0.17045}, Row{0.05, 0.05111}}) {
      Params q = p;
      q.epsilon = row.eps;
      double c2 = coercivity_on_constrained(solve_breather(q, 20));
      CHECK(c2 == Catch::Approx(row.c2).epsilon(2e-3));
      CHECK(c2 > 0.0);
    }
  }

  SECTION("report bundles spectrum, kernel, and coercivity consistently") {
    BreatherProfile prof = solve_breather(p, 10);
    SpectralReport rep = make_spectral_report(prof);
    REQUIRE(rep.eigenvalues.size() == 4 * 21);
    CHECK(std::is_sorted(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.eigenvalues.size()));
    CHECK(rep.kernel_residual == kernel_residual(prof));
    CHECK(rep.coercivity_c2 == coercivity_on_constrained(prof));
    // constrained minimum sits between the two lowest unconstrained eigenvalues
    CHECK(rep.coercivity_c2 >= rep.eigenvalues[0] - 1e-12);
    CHECK(rep.coercivity_c2 <= rep.eigenvalues[1] + 1e-12);
  }
}

TEST_CASE("zero-state dispersion") {
  Params p;

  SECTION("band endpoints") {
    auto [lp0, lm0] = zero_equilibrium_dispersion(p, 0.0);
    CHECK(lp0.real() == Catch::Approx(0.5590169943749475).epsilon(0).margin(1e-15));
    CHECK(lp0.imag() == 0.0);
    CHECK(lm0 == -lp0);
    auto [lpp, lmp] = zero_equilibrium_dispersion(p, M_PI);
    CHECK(lpp.real() == Catch::Approx(0.22912878474779195).epsilon(0).margin(1e-15));
    CHECK(lpp.imag() == 0.0);
  }

  SECTION("wavenumber outside the reduced zone is rejected") {
    REQUIRE_THROWS_AS(zero_equilibrium_dispersion(p, -0.1), Error);
    REQUIRE_THROWS_AS(zero_equilibrium_dispersion(p, 3.5), Error);
  }

  SECTION("gain above threshold turns the band-edge frequency imaginary") {
    Params q = p;
    q.gamma = 0.56;  // just past omega - 4 eps = 0.55
    auto [lp, lm] = zero_equilibrium_dispersion(q, M_PI);
    CHECK(std::abs(lp.imag()) > 0.0);
    auto [l0, l0m] = zero_equilibrium_dispersion(q, 0.0);
    CHECK(l0.imag() == 0.0);  // band center is still below gamma = omega
  }

  SECTION("closed-form threshold") {
    CHECK(dispersion_threshold_gamma(0.75, 0.05) == Catch::Approx(0.55).epsilon(0).margin(1e-15));
    CHECK(dispersion_threshold_gamma(-3.0, 0.05) == Catch::Approx(3.0).epsilon(0).margin(1e-15));
    REQUIRE_THROWS_AS(dispersion_threshold_gamma(0.0, 0.05), Error);
  }

  SECTION("empirical boundary scan brackets the threshold in both detuning regimes") {
    double up = scan_stability_boundary(0.75, 0.05, 0.7);
    CHECK(std::abs(up - 0.55) <= 1e-4 + 1e-12);
    double down = scan_stability_boundary(-3.0, 0.05, 3.2);
    CHECK(std::abs(down - 3.0) <= 1e-4 + 1e-12);
  }
}
