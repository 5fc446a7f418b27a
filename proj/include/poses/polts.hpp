#pragma once

#include "poses/estimator.hpp"
#include "poses/measures.hpp"
#include "poses/world.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace poses::polts {

// One labelled transition out of a tree node. Transitions out of the same
// node are ordered by the Euclidean distance between the detection and the
// predicted measurement H·ŝ (ties broken by detection id); `rank` is the
// position in that ordering, 0 being the nearest.
//
// `payoff` is the cost of suppressing the chosen detection itself (unused by
// the verification measures but kept for reporting); `combined_payoff` is the
// cost an attacker pays so that the tracker picks `chosen`: the sum of the
// payoffs of every gated detection strictly nearer than it. The
// no-observation branch (chosen absent) suppresses the entire gated set and
// pays the full sum.
struct Transition {
  est::FilterState child_state;
  std::optional<world::Detection> chosen;
  double payoff = 0.0;
  double combined_payoff = 0.0;
  int rank = 0;
};

// BFS tree node; parent = -1 marks the root.
struct PathNode {
  est::FilterState state;
  int parent = -1;
  std::optional<Transition> incoming;
  int depth = 0;  // step index k of `state`
};

// A complete track q_0 … q_e. In joint mode the nodes hold the primary
// track's filter states. step_phi[k] records the combined payoff paid on the
// transition entering step k (zero outside the attacked window).
struct Path {
  std::vector<est::FilterState> nodes;
  std::vector<std::optional<world::Detection>> observations;
  std::vector<double> step_phi;
  std::optional<verify::TrackMeasures> measures;

  double phi() const;

  // Per-step observation ids with -1 for "no observation"; the
  // lexicographic sort key that makes path sets order-normalized.
  std::vector<int> observation_ids() const;

  // Human-readable "k-id" labels over [l, u], e.g. "6-2,7-0,8-None".
  std::string window_label(int l, int u) const;
};

// All transitions out of `node` into step node.depth + 1: one per gated
// detection plus the no-observation branch (always last). Prediction is
// applied inside. A node whose posterior position-uncertainty trace exceeds
// params.trace_halt is abandoned: it stops associating and only coasts.
std::vector<Transition> build_transitions(const PathNode& node,
                                          const std::vector<world::Detection>& detections,
                                          const est::ModelParams& params);

// The unattacked tracker run: gated-nearest-neighbour association at every
// step, no branching.
Path run_original(const world::Scenario& scenario, const est::ModelParams& params,
                  const est::FilterState& init);

// Exhaustive BFS unfolding. The run is deterministic up to step l-1, the
// transitions entering steps l … u are attacked (every branch expanded), and
// each leaf is then continued to the horizon with unattacked association.
// Paths come back sorted by observation-id sequence; the set always contains
// the zero-payoff path. Throws ExplosionError when the path count would
// exceed max_paths.
std::vector<Path> unfold(const world::Scenario& scenario, const est::ModelParams& params,
                         const est::FilterState& init, int l, int u,
                         std::size_t max_paths = 1'000'000);

// ---------------------------------------------------------------------------
// Joint mode: same contract, but the underlying state is the full TrackSet
// and each attacked branch is realized by suppressing the strictly-nearer
// gated detections and running the joint association on the remainder. A
// branch is kept only when the primary track actually wins its detection
// (refiner tracks may claim it instead, in which case the outcome is not a
// reachable primary association and the branch is dropped). The
// no-observation branch suppresses every detection gated by the primary.

Path run_original_joint(const world::Scenario& scenario, const est::ModelParams& params,
                        const est::FilterState& init);

std::vector<Path> unfold_joint(const world::Scenario& scenario, const est::ModelParams& params,
                               const est::FilterState& init, int l, int u,
                               std::size_t max_paths = 1'000'000);

// Index of the path matching the unattacked run (compares observation ids).
std::size_t original_path_index(const std::vector<Path>& paths, const Path& original);

// ---------------------------------------------------------------------------
// Knapsack reduction: a chain with two branches per item — skip (payoff 0,
// step distance 0) or select (combined payoff v_i, step distance g_i). The
// associated problem asks for the cheapest selection whose accumulated
// distance exceeds the capacity: min { Σ v_i : Σ g_i > W }.

struct KnapsackItem {
  double value = 0.0;
  double weight = 0.0;
};

struct KnapsackInstance {
  std::vector<KnapsackItem> items;
  double capacity = 0.0;

  // Values and weights must be finite and > 0, capacity finite and ≥ 0.
  void validate() const;
};

struct KnapsackModel {
  struct Branch {
    double payoff = 0.0;
    double combined_payoff = 0.0;
    double dist = 0.0;
  };
  std::vector<std::array<Branch, 2>> steps;  // [0] = skip, [1] = select
};

std::pair<KnapsackModel, verify::VerificationProblem> knapsack_lts(const KnapsackInstance& inst);

// Enumerates all 2^n chain paths as measure-only paths (no filter states),
// in subset-mask order; mask 0 is the zero-payoff original. Throws
// ExplosionError when 2^n would exceed max_paths.
std::vector<Path> knapsack_paths(const KnapsackModel& model, std::size_t max_paths = 1'000'000);

}  // namespace poses::polts
