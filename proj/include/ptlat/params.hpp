#pragma once

#include <cmath>
#include <string>

#include "ptlat/error.hpp"

namespace ptlat {

// Model parameters of the gain/loss dimer lattice.
//
//   omega    on-site detuning (Omega), nonzero
//   gamma    gain/loss strength, positive
//   epsilon  inter-site coupling, the small continuation parameter
//   e_freq   breather frequency E; the anti-continuum dimer fixes the branch
//
// Defaults are the reference point used throughout the examples and checks.
// Branch solvers impose the stricter omega > gamma, |e_freq| > e0 conditions;
// plain time evolution only needs the constraints below.
struct Params {
  double omega = 0.75;
  double gamma = 0.5;
  double epsilon = 0.05;
  double e_freq = 2.6353658306247523;

  void validate() const {
    require(std::isfinite(omega) && std::isfinite(gamma) && std::isfinite(epsilon) &&
                std::isfinite(e_freq),
            ErrorKind::validation, "parameters must be finite");
    require(omega != 0.0, ErrorKind::validation, "omega must be nonzero");
    require(gamma > 0.0, ErrorKind::validation, "gamma must be positive");
    require(epsilon >= 0.0, ErrorKind::validation, "epsilon must be nonnegative");
  }
};

// Frequency of the zero-amplitude dimer, E0 = sqrt(omega^2 - gamma^2).
// Defined (and even in omega) whenever |omega| > gamma.
inline double e0(const Params& params) {
  require(std::abs(params.omega) > params.gamma, ErrorKind::domain,
          "e0 requires |omega| > gamma (unbroken regime)");
  return std::sqrt(params.omega * params.omega - params.gamma * params.gamma);
}

}  // namespace ptlat
