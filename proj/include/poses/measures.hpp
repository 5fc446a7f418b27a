#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace poses::verify {

// Per-path measure row: attack cost and deviation of an attacked run
// relative to the unattacked one.
struct TrackMeasures {
  double phi = 0.0;       // summed combined payoff over the attacked window
  double dist_acc = 0.0;  // deviation accumulated over the whole run
  double dist_max = 0.0;  // largest single-step deviation in the max window
  int max_step = -1;      // step attaining dist_max (first if tied)
  double dist_end = 0.0;  // deviation at the final step
  bool gamma_ok = true;   // uncertainty monitor clean at every step
};

enum class PropertyKind { Robustness, Resilience };

// A constrained-optimisation query over a set of measure rows.
//   Robustness:  among paths with dist_acc > epsilon, minimise phi.
//   Resilience:  among paths with dist_end > epsilon, minimise dist_max.
struct VerificationProblem {
  PropertyKind kind = PropertyKind::Robustness;
  double epsilon = 0.0;
  double theta = 0.0;  // acceptance threshold for the verdict
  int l = 0;           // attack window start (first attacked step)
  int u = 0;           // attack window end (last attacked step)
  int e = 0;           // horizon (last step of every path)
  int max_begin = 0;   // window over which dist_max is taken
  int max_end = 0;
};

enum class Verdict { Holds, Fails, Vacuous };

// Solver output. Paths are referred to by their index in the input row list.
struct VerificationResult {
  std::optional<double> sol_opt;     // optimum over violating paths (empty: none)
  std::optional<double> theta_star;  // best conforming objective below sol_opt
  std::optional<std::size_t> rho_star;  // row attaining theta_star
  std::vector<std::size_t> p_plus;   // violating rows
  std::vector<std::size_t> p_minus;  // conforming rows
  Verdict verdict = Verdict::Vacuous;
};

}  // namespace poses::verify
