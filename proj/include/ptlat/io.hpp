#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptlat/breather.hpp"
#include "ptlat/dynamics.hpp"
#include "ptlat/error.hpp"
#include "ptlat/hessian.hpp"
#include "ptlat/params.hpp"

namespace ptlat::io {

using json = nlohmann::json;

// All emitted floats use 17 significant digits (lossless for binary64) and are
// locale-independent, so identical inputs produce byte-identical files.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

inline std::string fmt_complex(Complex z) {
  return "[" + fmt(z.real()) + "," + fmt(z.imag()) + "]";
}

enum class Command { branch, breather, spectrum, evolve, metastab, check };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::branch: return "branch";
    case Command::breather: return "breather";
    case Command::spectrum: return "spectrum";
    case Command::evolve: return "evolve";
    case Command::metastab: return "metastab";
    case Command::check: return "check";
  }
  return "unknown";
}

inline Command command_from_string(const std::string& s) {
  if (s == "branch") return Command::branch;
  if (s == "breather") return Command::breather;
  if (s == "spectrum") return Command::spectrum;
  if (s == "evolve") return Command::evolve;
  if (s == "metastab") return Command::metastab;
  if (s == "check") return Command::check;
  fail(ErrorKind::validation, "unknown command: " + s);
}

struct ExperimentConfig {
  Command command = Command::check;
  Params params;  // defaults are the reference branch point
  int n_half = 20;
  double tol = 1e-12;
  double dt = 1e-3;
  double t_end = 50.0;
  std::vector<double> sweep;  // epsilon values for metastab; empty = default set
  bool has_sweep = false;
  std::uint64_t seed = 12345;
  std::string output_dir = "runs";

  void validate() const {
    params.validate();
    require(n_half >= 0, ErrorKind::validation, "n_half must be nonnegative");
    require(tol > 0.0, ErrorKind::validation, "tol must be positive");
    require(dt > 0.0, ErrorKind::validation, "dt must be positive");
    require(t_end > 0.0, ErrorKind::validation, "t_end must be positive");
    for (double e : sweep)
      require(e >= 0.0, ErrorKind::validation, "sweep epsilons must be nonnegative");
    require(!output_dir.empty(), ErrorKind::validation, "output_dir must be nonempty");
  }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    require(known, ErrorKind::validation, "unknown key '" + item.key() + "' in " + where);
  }
}

inline double as_double(const json& v, const std::string& what) {
  require(v.is_number(), ErrorKind::validation, what + " must be a number");
  return v.get<double>();
}

}  // namespace detail

// Parses a JSON config object; unknown keys are rejected rather than ignored.
inline ExperimentConfig config_from_json(const json& root) {
  require(root.is_object(), ErrorKind::validation, "config must be a JSON object");
  detail::reject_unknown_keys(root,
                              {"command", "params", "n_half", "tol", "dt", "t_end", "sweep",
                               "seed", "output_dir"},
                              "config");
  ExperimentConfig cfg;
  if (root.contains("command")) {
    require(root["command"].is_string(), ErrorKind::validation, "command must be a string");
    cfg.command = command_from_string(root["command"].get<std::string>());
  }
  if (root.contains("params")) {
    const json& p = root["params"];
    require(p.is_object(), ErrorKind::validation, "params must be an object");
    detail::reject_unknown_keys(p, {"omega", "gamma", "epsilon", "e_freq"}, "params");
    if (p.contains("omega")) cfg.params.omega = detail::as_double(p["omega"], "omega");
    if (p.contains("gamma")) cfg.params.gamma = detail::as_double(p["gamma"], "gamma");
    if (p.contains("epsilon")) cfg.params.epsilon = detail::as_double(p["epsilon"], "epsilon");
    if (p.contains("e_freq")) cfg.params.e_freq = detail::as_double(p["e_freq"], "e_freq");
  }
  if (root.contains("n_half")) {
    require(root["n_half"].is_number_integer(), ErrorKind::validation,
            "n_half must be an integer");
    cfg.n_half = root["n_half"].get<int>();
  }
  if (root.contains("tol")) cfg.tol = detail::as_double(root["tol"], "tol");
  if (root.contains("dt")) cfg.dt = detail::as_double(root["dt"], "dt");
  if (root.contains("t_end")) cfg.t_end = detail::as_double(root["t_end"], "t_end");
  if (root.contains("sweep")) {
    require(root["sweep"].is_array(), ErrorKind::validation, "sweep must be an array");
    cfg.has_sweep = true;
    for (const auto& v : root["sweep"]) cfg.sweep.push_back(detail::as_double(v, "sweep entry"));
  }
  if (root.contains("seed")) {
    require(root["seed"].is_number_integer(), ErrorKind::validation, "seed must be an integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("output_dir")) {
    require(root["output_dir"].is_string(), ErrorKind::validation,
            "output_dir must be a string");
    cfg.output_dir = root["output_dir"].get<std::string>();
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::validation, "cannot open config file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, "config parse error: " + std::string(e.what()));
  }
  return config_from_json(root);
}

// Canonical serialization: fixed key order, 17-digit floats. Used both for the
// config snapshot and for the run-directory hash, so identical configs map to
// identical run directories.
inline std::string config_to_json(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"command\": \"" << to_string(cfg.command) << "\",\n";
  out << "  \"params\": {\n";
  out << "    \"omega\": " << fmt(cfg.params.omega) << ",\n";
  out << "    \"gamma\": " << fmt(cfg.params.gamma) << ",\n";
  out << "    \"epsilon\": " << fmt(cfg.params.epsilon) << ",\n";
  out << "    \"e_freq\": " << fmt(cfg.params.e_freq) << "\n";
  out << "  },\n";
  out << "  \"n_half\": " << cfg.n_half << ",\n";
  out << "  \"tol\": " << fmt(cfg.tol) << ",\n";
  out << "  \"dt\": " << fmt(cfg.dt) << ",\n";
  out << "  \"t_end\": " << fmt(cfg.t_end) << ",\n";
  if (cfg.has_sweep) {
    out << "  \"sweep\": [";
    for (std::size_t i = 0; i < cfg.sweep.size(); ++i)
      out << (i ? ", " : "") << fmt(cfg.sweep[i]);
    out << "],\n";
  }
  out << "  \"seed\": " << fmt(cfg.seed) << ",\n";
  out << "  \"output_dir\": " << json(cfg.output_dir).dump() << "\n";
  out << "}\n";
  return out.str();
}

inline std::string hash8(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(h & 0xffffffffULL));
  return std::string(buf);
}

inline std::string write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::validation, "cannot write file: " + path.string());
  out << content;
  out.close();
  require(out.good(), ErrorKind::validation, "write failed: " + path.string());
  return path.string();
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::validation, "cannot open file: " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// One directory per run: <output_dir>/<command>-<hash8(config)>, with the
// config snapshot inside. Reusing a config reuses (and overwrites) its directory.
inline std::filesystem::path make_run_dir(const ExperimentConfig& cfg) {
  std::string snapshot = config_to_json(cfg);
  std::filesystem::path dir =
      std::filesystem::path(cfg.output_dir) /
      (std::string(to_string(cfg.command)) + "-" + hash8(snapshot));
  std::filesystem::create_directories(dir);
  write_text(dir / "config.json", snapshot);
  return dir;
}

// ---- profile persistence ----

inline std::string profile_to_json(const BreatherProfile& profile, double solver_tol) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"schema_version\": 1,\n";
  out << "  \"params\": {\n";
  out << "    \"omega\": " << fmt(profile.params.omega) << ",\n";
  out << "    \"gamma\": " << fmt(profile.params.gamma) << ",\n";
  out << "    \"epsilon\": " << fmt(profile.params.epsilon) << ",\n";
  out << "    \"e_freq\": " << fmt(profile.params.e_freq) << "\n";
  out << "  },\n";
  out << "  \"n_half\": " << profile.n_half << ",\n";
  out << "  \"u_profile\": [";
  for (int k = 0; k < profile.u.size(); ++k)
    out << (k ? ", " : "") << fmt_complex(profile.u[k]);
  out << "],\n";
  out << "  \"residual\": " << fmt(profile.residual) << ",\n";
  out << "  \"solver\": {\n";
  out << "    \"iterations\": " << profile.iterations << ",\n";
  out << "    \"tol\": " << fmt(solver_tol) << "\n";
  out << "  }\n";
  out << "}\n";
  return out.str();
}

struct LoadedProfile {
  BreatherProfile profile;
  double solver_tol = 0.0;
};

inline LoadedProfile profile_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, "profile schema error: " + std::string(e.what()));
  }
  require(root.is_object(), ErrorKind::validation, "profile schema error: not an object");
  detail::reject_unknown_keys(
      root, {"schema_version", "params", "n_half", "u_profile", "residual", "solver"},
      "profile");
  try {
    require(root.at("schema_version").get<int>() == 1, ErrorKind::validation,
            "profile schema error: unsupported schema_version");
    LoadedProfile loaded;
    const json& p = root.at("params");
    detail::reject_unknown_keys(p, {"omega", "gamma", "epsilon", "e_freq"}, "profile params");
    loaded.profile.params.omega = detail::as_double(p.at("omega"), "omega");
    loaded.profile.params.gamma = detail::as_double(p.at("gamma"), "gamma");
    loaded.profile.params.epsilon = detail::as_double(p.at("epsilon"), "epsilon");
    loaded.profile.params.e_freq = detail::as_double(p.at("e_freq"), "e_freq");
    loaded.profile.n_half = root.at("n_half").get<int>();
    const json& arr = root.at("u_profile");
    require(arr.is_array(), ErrorKind::validation, "profile schema error: u_profile");
    int m = 2 * loaded.profile.n_half + 1;
    require(static_cast<int>(arr.size()) == m, ErrorKind::validation,
            "profile schema error: u_profile length mismatch");
    loaded.profile.u = Vec(m);
    for (int k = 0; k < m; ++k) {
      const json& pair = arr[k];
      require(pair.is_array() && pair.size() == 2, ErrorKind::validation,
              "profile schema error: complex entries are [re, im] pairs");
      loaded.profile.u[k] = Complex{detail::as_double(pair[0], "re"),
                                    detail::as_double(pair[1], "im")};
    }
    loaded.profile.residual = detail::as_double(root.at("residual"), "residual");
    const json& solver = root.at("solver");
    detail::reject_unknown_keys(solver, {"iterations", "tol"}, "profile solver");
    loaded.profile.iterations = solver.at("iterations").get<int>();
    loaded.solver_tol = detail::as_double(solver.at("tol"), "solver tol");
    return loaded;
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, "profile schema error: " + std::string(e.what()));
  }
}

inline std::string write_profile(const std::filesystem::path& path,
                                 const BreatherProfile& profile, double solver_tol) {
  return write_text(path, profile_to_json(profile, solver_tol));
}

inline LoadedProfile read_profile(const std::filesystem::path& path) {
  return profile_from_json_text(read_text(path));
}

// ---- CSV ----

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path.string()) {
    out_.open(path, std::ios::binary);
    require(out_.good(), ErrorKind::validation, "cannot write file: " + path_);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
    columns_ = header.size();
  }

  void row(const std::vector<double>& values) {
    require(values.size() == columns_, ErrorKind::invariant, "CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << "\n";
  }

  const std::string& path() const { return path_; }

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_ = 0;
};

// ---- report serialization ----

inline std::string spectral_report_to_json(const SpectralReport& rep) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"schema_version\": 1,\n";
  out << "  \"kernel_residual\": " << fmt(rep.kernel_residual) << ",\n";
  out << "  \"coercivity_c2\": " << fmt(rep.coercivity_c2) << ",\n";
  out << "  \"eigenvalues\": [";
  for (int i = 0; i < rep.eigenvalues.size(); ++i)
    out << (i ? ", " : "") << fmt(rep.eigenvalues[i]);
  out << "]\n";
  out << "}\n";
  return out.str();
}

inline std::string metastability_report_to_json(const MetastabilityReport& rep) {
  auto arr = [](const auto& xs, auto&& f) {
    std::ostringstream o;
    o << "[";
    for (std::size_t i = 0; i < xs.size(); ++i) o << (i ? ", " : "") << f(xs[i]);
    o << "]";
    return o.str();
  };
  std::ostringstream out;
  out << "{\n";
  out << "  \"schema_version\": 1,\n";
  out << "  \"delta_init\": " << fmt(rep.delta_init) << ",\n";
  out << "  \"nu_exit\": " << fmt(rep.nu_exit) << ",\n";
  out << "  \"t_max\": " << fmt(rep.t_max) << ",\n";
  out << "  \"epsilons\": " << arr(rep.epsilons, [](double v) { return fmt(v); }) << ",\n";
  out << "  \"t0_measured\": " << arr(rep.t0_measured, [](double v) { return fmt(v); }) << ",\n";
  out << "  \"exited\": "
      << arr(rep.exited, [](bool b) { return std::string(b ? "true" : "false"); }) << ",\n";
  out << "  \"max_alpha_dev\": " << arr(rep.max_alpha_dev, [](double v) { return fmt(v); })
      << ",\n";
  out << "  \"max_phi_norm\": " << arr(rep.max_phi_norm, [](double v) { return fmt(v); })
      << ",\n";
  out << "  \"scaling_exponent\": " << fmt(rep.scaling_exponent) << ",\n";
  out << "  \"exponent_stderr\": " << fmt(rep.exponent_stderr) << ",\n";
  out << "  \"inconclusive\": " << (rep.inconclusive ? "true" : "false") << "\n";
  out << "}\n";
  return out.str();
}

inline std::string error_to_json(const Error& err) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"error\": " << json(std::string(ptlat::to_string(err.kind()))).dump() << ",\n";
  out << "  \"message\": " << json(std::string(err.what())).dump() << ",\n";
  out << "  \"exit_code\": " << err.exit_code() << "\n";
  out << "}\n";
  return out.str();
}

inline std::string manifest_to_json(const ExperimentConfig& cfg,
                                    const std::vector<std::string>& files) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"schema_version\": 1,\n";
  out << "  \"command\": \"" << to_string(cfg.command) << "\",\n";
  out << "  \"config_hash\": \"" << hash8(config_to_json(cfg)) << "\",\n";
  out << "  \"files\": [";
  for (std::size_t i = 0; i < files.size(); ++i)
    out << (i ? ", " : "") << json(files[i]).dump();
  out << "]\n";
  out << "}\n";
  return out.str();
}

}  // namespace ptlat::io
