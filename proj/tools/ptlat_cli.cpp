// Command-line laboratory for the gain/loss dimer lattice: stationary branches,
// breather continuation, second-variation spectra, time evolution with
// modulation tracking, perturbation sweeps, and the self-check suite.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptlat/breather.hpp"
#include "ptlat/dimer.hpp"
#include "ptlat/dynamics.hpp"
#include "ptlat/error.hpp"
#include "ptlat/expansion.hpp"
#include "ptlat/hessian.hpp"
#include "ptlat/io.hpp"
#include "ptlat/lattice.hpp"
#include "ptlat/verification.hpp"

namespace {

using namespace ptlat;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> omega, gamma, epsilon, e_freq, dt, t_end, tol;
  std::optional<int> n_half;
};

io::ExperimentConfig resolve_config(io::Command command, const CliOverrides& cli) {
  io::ExperimentConfig cfg;
  if (cli.config_path) cfg = io::load_config(*cli.config_path);
  cfg.command = command;
  if (cli.out_dir) cfg.output_dir = *cli.out_dir;
  if (cli.seed) cfg.seed = *cli.seed;
  if (cli.omega) cfg.params.omega = *cli.omega;
  if (cli.gamma) cfg.params.gamma = *cli.gamma;
  if (cli.epsilon) cfg.params.epsilon = *cli.epsilon;
  if (cli.e_freq) cfg.params.e_freq = *cli.e_freq;
  if (cli.n_half) cfg.n_half = *cli.n_half;
  if (cli.dt) cfg.dt = *cli.dt;
  if (cli.t_end) cfg.t_end = *cli.t_end;
  if (cli.tol) cfg.tol = *cli.tol;
  cfg.validate();
  return cfg;
}

int cmd_branch(const io::ExperimentConfig& cfg) {
  const Params& p = cfg.params;
  require(p.omega > p.gamma, ErrorKind::domain, "branch table requires omega > gamma");
  std::filesystem::path dir = io::make_run_dir(cfg);
  io::CsvWriter csv(dir / "branch.csv",
                    {"amplitude", "e_plus", "e_minus", "theta", "mu1", "mu2", "mu3"});
  for (int i = 0; i <= 200; ++i) {
    double amp = 2.0 * i / 200.0;
    double e_plus = dimer_branch_e(amp, p);
    double x = amp * amp;
    double theta = 0.5 * std::atan2(p.gamma / (p.omega + 4.0 * x),
                                    e_plus / (p.omega + 8.0 * x));
    double mu1 = kNaN, mu2 = kNaN, mu3 = kNaN;
    if (amp > 0.0) {
      Params at = p;
      at.e_freq = e_plus;
      std::array<double, 4> mus = dimer_block_eigenvalues(at, amp);
      mu1 = mus[1];
      mu2 = mus[2];
      mu3 = mus[3];
    }
    csv.row({amp, e_plus, -e_plus, theta, mu1, mu2, mu3});
  }
  io::write_text(dir / "manifest.json", io::manifest_to_json(cfg, {"branch.csv"}));
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_breather(const io::ExperimentConfig& cfg) {
  BreatherProfile prof = solve_breather(cfg.params, cfg.n_half, cfg.tol);
  std::filesystem::path dir = io::make_run_dir(cfg);
  io::write_profile(dir / "profile.json", prof, cfg.tol);

  std::vector<std::string> files{"profile.json"};
  if (cfg.params.epsilon > 0.0) {
    DecayFit fit = decay_fit(prof);
    io::CsvWriter csv(dir / "decay.csv", {"n", "abs_u", "fit_abs_u"});
    double center_mag = std::abs(prof.at(0));
    for (int n = -prof.n_half; n <= prof.n_half; ++n)
      csv.row({static_cast<double>(n), std::abs(prof.at(n)),
               center_mag * std::exp(fit.slope * std::abs(n))});
    std::ostringstream rep;
    rep << "{\n";
    rep << "  \"residual\": " << io::fmt(prof.residual) << ",\n";
    rep << "  \"iterations\": " << prof.iterations << ",\n";
    rep << "  \"symmetry_defect\": " << io::fmt(prof.symmetry_defect()) << ",\n";
    rep << "  \"decay_slope\": " << io::fmt(fit.slope) << ",\n";
    rep << "  \"decay_rate\": " << io::fmt(fit.rate) << "\n";
    rep << "}\n";
    io::write_text(dir / "breather_report.json", rep.str());
    files.push_back("decay.csv");
    files.push_back("breather_report.json");
  }
  io::write_text(dir / "manifest.json", io::manifest_to_json(cfg, files));
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_spectrum(const io::ExperimentConfig& cfg) {
  BreatherProfile prof = solve_breather(cfg.params, cfg.n_half, cfg.tol);
  SpectralReport rep = make_spectral_report(prof);
  std::filesystem::path dir = io::make_run_dir(cfg);
  io::write_text(dir / "spectral_report.json", io::spectral_report_to_json(rep));
  io::CsvWriter csv(dir / "eigenvalues.csv", {"index", "eigenvalue"});
  for (int i = 0; i < rep.eigenvalues.size(); ++i)
    csv.row({static_cast<double>(i), rep.eigenvalues[i]});
  io::write_text(dir / "manifest.json",
                 io::manifest_to_json(cfg, {"spectral_report.json", "eigenvalues.csv"}));
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_evolve(const io::ExperimentConfig& cfg) {
  BreatherProfile prof = solve_breather(cfg.params, cfg.n_half, cfg.tol);
  Trajectory traj = integrate_gated(prof.to_state(), cfg.params, cfg.t_end, cfg.dt);
  std::filesystem::path dir = io::make_run_dir(cfg);
  io::CsvWriter csv(dir / "trajectory.csv", {"t", "energy_h", "charge_q", "lambda_e",
                                             "norm_sq", "phi_norm", "alpha", "alpha_dot"});
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const DiagnosticRecord& rec = traj.records[i];
    double phi_norm = kNaN, alpha = kNaN, alpha_dot = kNaN;
    try {
      ModulationState mod = modulation_decompose(traj.states[i], prof);
      phi_norm = std::sqrt(mod.phi.norm_sq());
      alpha = mod.alpha;
      alpha_dot = alpha_dot_eval(prof, mod, cfg.params);
    } catch (const Error&) {
      // state left the tube around the breather orbit; emit NaN columns
    }
    csv.row({rec.t, rec.energy_h, rec.charge_q, rec.lambda_e, rec.norm_sq, phi_norm, alpha,
             alpha_dot});
  }
  io::write_text(dir / "manifest.json", io::manifest_to_json(cfg, {"trajectory.csv"}));
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_metastab(const io::ExperimentConfig& cfg) {
  std::vector<double> sweep =
      cfg.has_sweep ? cfg.sweep : std::vector<double>{0.04, 0.02, 0.01, 0.005, 0.0};
  MetastabilityReport rep = metastability_sweep(cfg.params, sweep, 0.01, 0.2, cfg.t_end,
                                                cfg.n_half, cfg.seed);
  std::filesystem::path dir = io::make_run_dir(cfg);
  io::write_text(dir / "metastab_report.json", io::metastability_report_to_json(rep));
  io::CsvWriter csv(dir / "exits.csv",
                    {"epsilon", "t0", "exited", "max_phi_norm", "max_alpha_dev"});
  for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
    csv.row({rep.epsilons[i], rep.t0_measured[i], rep.exited[i] ? 1.0 : 0.0,
             rep.max_phi_norm[i], rep.max_alpha_dev[i]});
  io::write_text(dir / "manifest.json",
                 io::manifest_to_json(cfg, {"metastab_report.json", "exits.csv"}));
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_check(const io::ExperimentConfig& cfg) {
  std::vector<CheckResult> results = run_all_checks(cfg.seed);
  std::cout << format_check_table(results);
  std::filesystem::path dir = io::make_run_dir(cfg);
  io::write_text(dir / "checks.json", checks_to_json(results));
  io::write_text(dir / "manifest.json", io::manifest_to_json(cfg, {"checks.json"}));
  return all_passed(results) ? 0 : exit_code(ErrorKind::invariant);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gain/loss dimer lattice laboratory"};
  app.require_subcommand(1);

  CliOverrides cli;
  io::Command command = io::Command::check;
  for (io::Command c : {io::Command::branch, io::Command::breather, io::Command::spectrum,
                        io::Command::evolve, io::Command::metastab, io::Command::check}) {
    CLI::App* sub = app.add_subcommand(io::to_string(c));
    sub->callback([&command, c]() { command = c; });
    sub->add_option("--config", cli.config_path, "JSON config file");
    sub->add_option("--out", cli.out_dir, "output directory");
    sub->add_option("--seed", cli.seed, "random seed");
    sub->add_option("--omega", cli.omega, "on-site detuning");
    sub->add_option("--gamma", cli.gamma, "gain/loss strength");
    sub->add_option("--epsilon", cli.epsilon, "inter-site coupling");
    sub->add_option("--e-freq", cli.e_freq, "breather frequency");
    sub->add_option("--n-half", cli.n_half, "half-width of the lattice");
    sub->add_option("--dt", cli.dt, "integrator step");
    sub->add_option("--t-end", cli.t_end, "integration horizon");
    sub->add_option("--tol", cli.tol, "solver tolerance");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ptlat::ErrorKind::validation);
  }

  try {
    io::ExperimentConfig cfg = resolve_config(command, cli);
    switch (cfg.command) {
      case io::Command::branch: return cmd_branch(cfg);
      case io::Command::breather: return cmd_breather(cfg);
      case io::Command::spectrum: return cmd_spectrum(cfg);
      case io::Command::evolve: return cmd_evolve(cfg);
      case io::Command::metastab: return cmd_metastab(cfg);
      case io::Command::check: return cmd_check(cfg);
    }
  } catch (const ptlat::Error& err) {
    std::cerr << io::error_to_json(err);
    return err.exit_code();
  } catch (const std::exception& err) {
    std::cerr << "{\n  \"error\": \"internal\",\n  \"message\": "
              << io::json(std::string(err.what())).dump() << "\n}\n";
    return 1;
  }
  return 0;
}
