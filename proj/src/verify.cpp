#include "poses/verify.hpp"

#include "poses/errors.hpp"
#include "poses/estimator.hpp"
#include "poses/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace poses::verify {

double step_dist(const polts::Path& a, const polts::Path& b, int k) {
  const auto i = static_cast<std::size_t>(k);
  return (a.nodes[i].position() - b.nodes[i].position()).norm();
}

TrackMeasures measures(const polts::Path& original, const polts::Path& attacked,
                       const VerificationProblem& problem) {
  if (original.nodes.size() != attacked.nodes.size()) {
    throw ConfigError("paths must have equal length to be compared");
  }
  const int e = static_cast<int>(attacked.nodes.size()) - 1;

  TrackMeasures m;
  for (int k = 0; k <= e; ++k) m.dist_acc += step_dist(original, attacked, k);
  m.dist_end = step_dist(original, attacked, e);

  const int lo = std::max(0, problem.max_begin);
  const int hi = std::min(e, problem.max_end);
  for (int k = lo; k <= hi; ++k) {
    double d = step_dist(original, attacked, k);
    if (m.max_step < 0 || d > m.dist_max) {
      m.dist_max = d;
      m.max_step = k;
    }
  }

  for (int k = problem.l; k <= problem.u && k <= e; ++k) {
    m.phi += attacked.step_phi[static_cast<std::size_t>(k)];
    double tau_prev = est::uncertainty_trace(attacked.nodes[static_cast<std::size_t>(k) - 1]);
    double tau_cur = est::uncertainty_trace(attacked.nodes[static_cast<std::size_t>(k)]);
    if (est::monitor_gamma(tau_prev, tau_cur) == 0) m.gamma_ok = false;
  }
  return m;
}

void compute_measures(const polts::Path& original, std::vector<polts::Path>& paths,
                      const VerificationProblem& problem) {
  parallel_for(paths.size(),
               [&](std::size_t i) { paths[i].measures = measures(original, paths[i], problem); });
}

namespace {

const TrackMeasures& row_of(const polts::Path& path) {
  if (!path.measures) throw ConfigError("path measures have not been computed");
  return *path.measures;
}

}  // namespace

VerificationResult solve(const std::vector<polts::Path>& paths,
                         const VerificationProblem& problem) {
  bool has_original = false;
  for (const auto& p : paths) {
    if (row_of(p).phi <= 0.0) {
      has_original = true;
      break;
    }
  }
  if (!has_original) {
    throw MissingOriginal("no zero-payoff path in the input set; optima are relative to it");
  }

  const bool robustness = problem.kind == PropertyKind::Robustness;
  VerificationResult result;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const TrackMeasures& m = row_of(paths[i]);
    double deviation = robustness ? m.dist_acc : m.dist_end;
    if (deviation > problem.epsilon) {
      result.p_plus.push_back(i);
    } else {
      result.p_minus.push_back(i);
    }
  }

  auto objective = [&](std::size_t i) {
    const TrackMeasures& m = row_of(paths[i]);
    return robustness ? m.phi : m.dist_max;
  };

  if (result.p_plus.empty()) {
    result.verdict = Verdict::Vacuous;
    return result;
  }
  double sol = objective(result.p_plus.front());
  for (std::size_t i : result.p_plus) sol = std::min(sol, objective(i));
  result.sol_opt = sol;

  for (std::size_t i : result.p_minus) {
    double obj = objective(i);
    if (obj >= sol) continue;
    if (!result.theta_star || obj > *result.theta_star) {
      result.theta_star = obj;
      result.rho_star = i;
    }
  }

  result.verdict = threshold_verdict(result, problem.theta);
  return result;
}

Verdict threshold_verdict(const VerificationResult& result, double theta) {
  if (!result.sol_opt) return Verdict::Holds;
  return *result.sol_opt > theta ? Verdict::Holds : Verdict::Fails;
}

std::vector<polts::Path> monitor_filter(std::vector<polts::Path> paths) {
  std::erase_if(paths, [](const polts::Path& p) { return !row_of(p).gamma_ok; });
  return paths;
}

}  // namespace poses::verify
