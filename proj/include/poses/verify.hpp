#pragma once

#include "poses/measures.hpp"
#include "poses/polts.hpp"

#include <vector>

namespace poses::verify {

// Euclidean distance between the estimated positions of two paths at step k.
double step_dist(const polts::Path& a, const polts::Path& b, int k);

// Measure row of one attacked path against the unattacked one:
//   phi      — combined payoff summed over the attacked window [l, u]
//   dist_acc — deviation summed over every step 0 .. e
//   dist_max — largest per-step deviation over [max_begin, max_end], with the
//              first step attaining it in max_step
//   dist_end — deviation at the horizon e
//   gamma_ok — uncertainty monitor clean (τ never grew) over the attacked window
TrackMeasures measures(const polts::Path& original, const polts::Path& attacked,
                       const VerificationProblem& problem);

// Fills path.measures for every path, in parallel; byte-identical results for
// any worker count.
void compute_measures(const polts::Path& original, std::vector<polts::Path>& paths,
                      const VerificationProblem& problem);

// Constrained optimisation over a path set whose measures are computed.
//   Robustness:  P⁺ = {dist_acc > ε}, objective = phi.
//   Resilience:  P⁺ = {dist_end > ε}, objective = dist_max.
// sol_opt is the minimum objective over P⁺; θ* the largest objective among
// conforming paths strictly below sol_opt, ρ* its path (first on ties).
// Empty P⁺ leaves the optima absent (reported as unbounded) with verdict
// Vacuous; otherwise the verdict is the threshold test against problem.theta.
// Throws MissingOriginal when no zero-payoff path is present.
VerificationResult solve(const std::vector<polts::Path>& paths,
                         const VerificationProblem& problem);

// Two-step acceptance: Holds iff sol_opt > theta (strictly) or no violating
// path exists.
Verdict threshold_verdict(const VerificationResult& result, double theta);

// Removes every path whose monitor tripped (gamma_ok = false); measures must
// be computed.
std::vector<polts::Path> monitor_filter(std::vector<polts::Path> paths);

}  // namespace poses::verify
