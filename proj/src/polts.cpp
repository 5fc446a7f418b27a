#include "poses/polts.hpp"

#include "poses/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace poses::polts {

namespace {

struct GatedDetection {
  world::Detection det;
  double eucl;  // Euclidean distance to the predicted measurement
};

// Gated detections sorted by the nearness order: Euclidean distance to H·ŝ,
// ties broken by detection id.
std::vector<GatedDetection> gated_sorted(const est::FilterState& pred,
                                         const std::vector<world::Detection>& detections,
                                         const est::ModelParams& params) {
  est::Innovation inn = est::innovation(pred, params);
  est::Vec2 centre = params.H * pred.s;
  std::vector<GatedDetection> out;
  for (const auto& d : detections) {
    if (est::mahalanobis(d.z, pred, inn, params) > params.gate) continue;
    out.push_back({d, (d.z - centre).norm()});
  }
  std::sort(out.begin(), out.end(), [](const GatedDetection& a, const GatedDetection& b) {
    if (a.eucl != b.eucl) return a.eucl < b.eucl;
    return a.det.id < b.det.id;
  });
  return out;
}

// Combined payoff of choosing gated[i]: the payoffs of everything strictly
// nearer. Equal distances are incomparable in the partial order and do not
// contribute, so the sum runs over strictly smaller Euclidean distance.
double combined_payoff_at(const std::vector<GatedDetection>& gated, std::size_t i) {
  double sum = 0.0;
  for (const auto& g : gated) {
    if (g.eucl < gated[i].eucl) sum += world::attack_payoff(g.det);
  }
  return sum;
}

double total_payoff(const std::vector<GatedDetection>& gated) {
  double sum = 0.0;
  for (const auto& g : gated) sum += world::attack_payoff(g.det);
  return sum;
}

bool halted(const est::FilterState& posterior, const est::ModelParams& params) {
  return est::uncertainty_trace(posterior) > params.trace_halt;
}

// One unattacked tracker step from a posterior state.
void original_step(est::FilterState& cur, std::optional<world::Detection>& obs,
                   const std::vector<world::Detection>& detections,
                   const est::ModelParams& params) {
  est::FilterState pred = est::predict(cur, params);
  obs.reset();
  if (!halted(cur, params)) {
    obs = est::gnn_associate(detections, pred, est::innovation(pred, params), params);
  }
  cur = obs ? est::update(pred, obs->z, params).first : pred;
}

// One unattacked joint step; obs receives the main track's detection.
void original_step_joint(est::TrackSet& cur, std::optional<world::Detection>& obs,
                         const std::vector<world::Detection>& detections,
                         const est::ModelParams& params) {
  est::TrackSet predicted = est::joint_predict(cur, params);
  bool primary_active = !halted(cur.primary, params);
  est::JointAssignment assignment =
      est::joint_associate(predicted, detections, params, primary_active);
  obs.reset();
  if (assignment.detection_of_track[0]) {
    obs = detections[static_cast<std::size_t>(*assignment.detection_of_track[0])];
  }
  cur = est::joint_apply(predicted, detections, assignment, params);
}

void check_window(int l, int u, int e) {
  if (!(1 <= l && l <= u && u <= e)) {
    throw ConfigError("attack window must satisfy 1 <= l <= u <= horizon (" +
                      std::to_string(l) + ":" + std::to_string(u) + " vs e=" +
                      std::to_string(e) + ")");
  }
}

[[noreturn]] void throw_explosion(std::size_t cap) {
  throw ExplosionError("unfolding exceeds the path budget of " + std::to_string(cap) +
                       " paths");
}

// Branch of the joint-mode unfolding; `chosen` empty = no-observation.
struct JointBranch {
  est::TrackSet child;
  std::optional<world::Detection> chosen;
  double combined_payoff = 0.0;
};

// All realizable attacked branches out of a joint posterior. Each detection
// branch suppresses the strictly-nearer detections gated by the main track
// and keeps the branch only if the main track wins the detection under the
// joint association; the no-observation branch suppresses the whole gated
// set. Detections are suppressed for every track (the attacker removes them
// from the frame).
std::vector<JointBranch> joint_branches(const est::TrackSet& tracks,
                                        const std::vector<world::Detection>& detections,
                                        const est::ModelParams& params) {
  est::TrackSet predicted = est::joint_predict(tracks, params);
  bool primary_active = !halted(tracks.primary, params);
  std::vector<GatedDetection> gated =
      primary_active ? gated_sorted(predicted.primary, detections, params)
                     : std::vector<GatedDetection>{};

  auto without = [&](double max_eucl) {
    // Drop gated detections strictly nearer than max_eucl (all when < 0).
    std::vector<world::Detection> left;
    for (const auto& d : detections) {
      bool suppressed = false;
      for (const auto& g : gated) {
        if (g.det.id != d.id) continue;
        suppressed = max_eucl < 0.0 || g.eucl < max_eucl;
        break;
      }
      if (!suppressed) left.push_back(d);
    }
    return left;
  };

  std::vector<JointBranch> out;
  for (std::size_t i = 0; i < gated.size(); ++i) {
    std::vector<world::Detection> left = without(gated[i].eucl);
    est::JointAssignment assignment = est::joint_associate(predicted, left, params, true);
    std::optional<int> got = assignment.detection_of_track[0];
    if (!got || left[static_cast<std::size_t>(*got)].id != gated[i].det.id) continue;
    JointBranch b;
    b.child = est::joint_apply(predicted, left, assignment, params);
    b.chosen = gated[i].det;
    b.combined_payoff = combined_payoff_at(gated, i);
    out.push_back(std::move(b));
  }

  std::vector<world::Detection> none_left = without(-1.0);
  est::JointAssignment assignment =
      est::joint_associate(predicted, none_left, params, primary_active);
  JointBranch none;
  none.child = est::joint_apply(predicted, none_left, assignment, params);
  none.combined_payoff = total_payoff(gated);
  out.push_back(std::move(none));
  return out;
}

}  // namespace

double Path::phi() const {
  return std::accumulate(step_phi.begin(), step_phi.end(), 0.0);
}

std::vector<int> Path::observation_ids() const {
  std::vector<int> ids;
  ids.reserve(observations.size());
  for (const auto& o : observations) ids.push_back(o ? o->id : -1);
  return ids;
}

std::string Path::window_label(int l, int u) const {
  std::ostringstream out;
  for (int k = l; k <= u && k < static_cast<int>(observations.size()); ++k) {
    if (k > l) out << ',';
    out << k << '-';
    const auto& o = observations[static_cast<std::size_t>(k)];
    if (o) {
      out << o->id;
    } else {
      out << "None";
    }
  }
  return out.str();
}

std::vector<Transition> build_transitions(const PathNode& node,
                                          const std::vector<world::Detection>& detections,
                                          const est::ModelParams& params) {
  est::FilterState pred = est::predict(node.state, params);
  std::vector<GatedDetection> gated = halted(node.state, params)
                                          ? std::vector<GatedDetection>{}
                                          : gated_sorted(pred, detections, params);

  std::vector<Transition> out;
  out.reserve(gated.size() + 1);
  for (std::size_t i = 0; i < gated.size(); ++i) {
    Transition t;
    t.child_state = est::update(pred, gated[i].det.z, params).first;
    t.chosen = gated[i].det;
    t.payoff = world::attack_payoff(gated[i].det);
    t.combined_payoff = combined_payoff_at(gated, i);
    t.rank = static_cast<int>(i);
    out.push_back(std::move(t));
  }
  Transition none;
  none.child_state = pred;
  none.combined_payoff = total_payoff(gated);
  none.rank = static_cast<int>(gated.size());
  out.push_back(std::move(none));
  return out;
}

namespace {

// Shared unfolding skeleton: `expand(state, Z_k)` enumerates the attacked
// branches of a node, `advance(state, Z_k, obs)` performs one unattacked
// step. TState is the node state (FilterState or TrackSet); the primary
// filter state recorded on the path is extracted by `primary`.
template <typename TState, typename Expand, typename Advance, typename Primary>
std::vector<Path> unfold_generic(const world::Scenario& scenario, const TState& init,
                                 int l, int u, std::size_t max_paths, Expand expand,
                                 Advance advance, Primary primary) {
  const int e = scenario.horizon();
  check_window(l, u, e);

  // Deterministic shared prefix over steps 1 .. l-1.
  std::vector<est::FilterState> prefix_nodes{primary(init)};
  std::vector<std::optional<world::Detection>> prefix_obs{std::nullopt};
  TState cur = init;
  for (int k = 1; k < l; ++k) {
    std::optional<world::Detection> obs;
    advance(cur, scenario.detections[static_cast<std::size_t>(k)], obs);
    prefix_nodes.push_back(primary(cur));
    prefix_obs.push_back(obs);
  }

  // BFS over the attacked window.
  struct Node {
    TState state;
    int parent;
    std::optional<world::Detection> obs;
    double phi;
  };
  std::vector<Node> arena;
  arena.push_back({cur, -1, std::nullopt, 0.0});
  std::vector<std::size_t> frontier{0};
  for (int k = l; k <= u; ++k) {
    std::vector<std::size_t> next;
    for (std::size_t index : frontier) {
      // Copy: arena may reallocate while children are appended.
      TState parent_state = arena[index].state;
      auto branches = expand(parent_state, scenario.detections[static_cast<std::size_t>(k)]);
      for (auto& b : branches) {
        if (next.size() >= max_paths) throw_explosion(max_paths);
        arena.push_back({std::move(b.child), static_cast<int>(index), std::move(b.chosen),
                         b.combined_payoff});
        next.push_back(arena.size() - 1);
      }
    }
    frontier = std::move(next);
  }

  // Materialize one path per leaf: shared prefix, recorded window, and an
  // unattacked continuation to the horizon.
  std::vector<Path> paths;
  paths.reserve(frontier.size());
  for (std::size_t leaf : frontier) {
    Path p;
    p.nodes = prefix_nodes;
    p.observations = prefix_obs;
    p.step_phi.assign(prefix_nodes.size(), 0.0);

    std::vector<std::size_t> chain;
    for (int at = static_cast<int>(leaf); at > 0; at = arena[static_cast<std::size_t>(at)].parent) {
      chain.push_back(static_cast<std::size_t>(at));
    }
    std::reverse(chain.begin(), chain.end());
    for (std::size_t at : chain) {
      p.nodes.push_back(primary(arena[at].state));
      p.observations.push_back(arena[at].obs);
      p.step_phi.push_back(arena[at].phi);
    }

    TState tail = arena[leaf].state;
    for (int k = u + 1; k <= e; ++k) {
      std::optional<world::Detection> obs;
      advance(tail, scenario.detections[static_cast<std::size_t>(k)], obs);
      p.nodes.push_back(primary(tail));
      p.observations.push_back(obs);
      p.step_phi.push_back(0.0);
    }
    paths.push_back(std::move(p));
  }

  std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
    return a.observation_ids() < b.observation_ids();
  });
  return paths;
}

struct SingleBranch {
  est::FilterState child;
  std::optional<world::Detection> chosen;
  double combined_payoff;
};

}  // namespace

Path run_original(const world::Scenario& scenario, const est::ModelParams& params,
                  const est::FilterState& init) {
  Path p;
  p.nodes.push_back(init);
  p.observations.emplace_back(std::nullopt);
  p.step_phi.push_back(0.0);
  est::FilterState cur = init;
  for (int k = 1; k <= scenario.horizon(); ++k) {
    std::optional<world::Detection> obs;
    original_step(cur, obs, scenario.detections[static_cast<std::size_t>(k)], params);
    p.nodes.push_back(cur);
    p.observations.push_back(obs);
    p.step_phi.push_back(0.0);
  }
  return p;
}

Path run_original_joint(const world::Scenario& scenario, const est::ModelParams& params,
                        const est::FilterState& init) {
  Path p;
  p.nodes.push_back(init);
  p.observations.emplace_back(std::nullopt);
  p.step_phi.push_back(0.0);
  est::TrackSet cur;
  cur.primary = init;
  for (int k = 1; k <= scenario.horizon(); ++k) {
    std::optional<world::Detection> obs;
    original_step_joint(cur, obs, scenario.detections[static_cast<std::size_t>(k)], params);
    p.nodes.push_back(cur.primary);
    p.observations.push_back(obs);
    p.step_phi.push_back(0.0);
  }
  return p;
}

std::vector<Path> unfold(const world::Scenario& scenario, const est::ModelParams& params,
                         const est::FilterState& init, int l, int u, std::size_t max_paths) {
  auto expand = [&](const est::FilterState& state,
                    const std::vector<world::Detection>& detections) {
    PathNode node;
    node.state = state;
    std::vector<SingleBranch> branches;
    for (auto& t : build_transitions(node, detections, params)) {
      branches.push_back({std::move(t.child_state), std::move(t.chosen), t.combined_payoff});
    }
    return branches;
  };
  auto advance = [&](est::FilterState& state, const std::vector<world::Detection>& detections,
                     std::optional<world::Detection>& obs) {
    original_step(state, obs, detections, params);
  };
  auto primary = [](const est::FilterState& state) { return state; };
  return unfold_generic(scenario, init, l, u, max_paths, expand, advance, primary);
}

std::vector<Path> unfold_joint(const world::Scenario& scenario, const est::ModelParams& params,
                               const est::FilterState& init, int l, int u,
                               std::size_t max_paths) {
  est::TrackSet root;
  root.primary = init;
  auto expand = [&](const est::TrackSet& state,
                    const std::vector<world::Detection>& detections) {
    return joint_branches(state, detections, params);
  };
  auto advance = [&](est::TrackSet& state, const std::vector<world::Detection>& detections,
                     std::optional<world::Detection>& obs) {
    original_step_joint(state, obs, detections, params);
  };
  auto primary = [](const est::TrackSet& state) { return state.primary; };
  return unfold_generic(scenario, root, l, u, max_paths, expand, advance, primary);
}

std::size_t original_path_index(const std::vector<Path>& paths, const Path& original) {
  std::vector<int> key = original.observation_ids();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].observation_ids() == key) return i;
  }
  throw MissingOriginal("the unattacked path is not in the unfolded set");
}

void KnapsackInstance::validate() const {
  for (const auto& item : items) {
    if (!(item.value > 0.0) || !std::isfinite(item.value) || !(item.weight > 0.0) ||
        !std::isfinite(item.weight)) {
      throw ConfigError("knapsack items need finite positive values and weights");
    }
  }
  if (!(capacity >= 0.0) || !std::isfinite(capacity)) {
    throw ConfigError("knapsack capacity must be finite and >= 0");
  }
}

std::pair<KnapsackModel, verify::VerificationProblem> knapsack_lts(const KnapsackInstance& inst) {
  inst.validate();
  KnapsackModel model;
  model.steps.reserve(inst.items.size());
  for (const auto& item : inst.items) {
    KnapsackModel::Branch skip{0.0, 0.0, 0.0};
    KnapsackModel::Branch select{item.value, item.value, item.weight};
    model.steps.push_back({skip, select});
  }

  verify::VerificationProblem problem;
  problem.kind = verify::PropertyKind::Robustness;
  problem.epsilon = inst.capacity;
  problem.theta = 0.0;
  problem.l = 1;
  problem.u = static_cast<int>(inst.items.size());
  problem.e = static_cast<int>(inst.items.size());
  problem.max_begin = 1;
  problem.max_end = static_cast<int>(inst.items.size());
  return {std::move(model), problem};
}

std::vector<Path> knapsack_paths(const KnapsackModel& model, std::size_t max_paths) {
  const std::size_t n = model.steps.size();
  if (n >= 63 || (std::size_t{1} << n) > max_paths) throw_explosion(max_paths);

  std::vector<Path> paths;
  paths.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Path p;
    p.step_phi.assign(n + 1, 0.0);
    verify::TrackMeasures m;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& branch = model.steps[i][(mask >> i) & 1u];
      p.step_phi[i + 1] = branch.combined_payoff;
      m.phi += branch.combined_payoff;
      m.dist_acc += branch.dist;
      if (branch.dist > m.dist_max) {
        m.dist_max = branch.dist;
        m.max_step = static_cast<int>(i) + 1;
      }
      if (i + 1 == n) m.dist_end = branch.dist;
    }
    p.measures = m;
    paths.push_back(std::move(p));
  }
  return paths;
}

}  // namespace poses::polts
