#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace poses::world {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;

// One sensor return at a given time step. `payoff` is the cost an attacker
// pays to suppress this detection; `truth_id` identifies the vehicle that
// caused it (empty for clutter).
struct Detection {
  int id = 0;
  Vec2 z = Vec2::Zero();
  double payoff = 0.0;
  std::optional<int> truth_id;
};

// How detection payoffs are assigned at generation time.
//   Constant:        payoff = a                       (default a = 1)
//   Uniform:         payoff ~ U[a, b)                 (default [0, 1))
//   DistanceScaled:  payoff = a + b * |z - centre|    (centre of the scene)
struct PayoffModel {
  enum class Kind { Constant, Uniform, DistanceScaled };
  Kind kind = Kind::Constant;
  double a = 1.0;
  double b = 1.0;
};

// Straight-line vehicle with optional waypoint overrides: at step k the
// vehicle is placed at `waypoints[k]` instead of integrating its velocity;
// integration resumes from the overridden position.
struct VehicleSpec {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  std::map<int, Vec2> waypoints;
};

struct ScenarioConfig {
  int n_steps = 20;  // number of time steps; k runs over [0, n_steps-1]
  std::vector<VehicleSpec> vehicles;
  double misdetect_prob = 0.0;        // per vehicle per step
  double false_alarm_rate = 0.0;      // Poisson mean clutter count per step
  double detection_noise_sigma = 0.0; // isotropic measurement noise
  PayoffModel payoff_model;
  std::uint64_t seed = 0;
  int max_detections_per_step = 5;    // hard cap; surplus returns are dropped
                                      // in generation order (vehicles first)
  Vec2 scene_min = Vec2(0.0, 0.0);    // clutter is drawn uniformly in this box
  Vec2 scene_max = Vec2(1000.0, 1000.0);
  std::optional<Vec4> init_state;     // default: vehicle 0 position, zero velocity
  std::optional<Vec4> init_cov_diag;  // default: (900, 900, 400, 400)

  // Throws ConfigError on violated invariants (bad probabilities, fewer than
  // two steps, non-positive detection cap, inverted scene box).
  void validate() const;
};

// Materialized world: ground truth and the detection sets Z_0..Z_e with
// e = n_steps - 1. Detection ids are unique within a step and count from 0
// in generation order.
struct Scenario {
  std::vector<std::vector<Vec2>> truth;             // [vehicle][step]
  std::vector<std::vector<Detection>> detections;   // [step][...]

  int horizon() const { return static_cast<int>(detections.size()) - 1; }
};

// Deterministic generation: one RNG stream seeded from config.seed drives
// misdetections, noise, clutter count/placement and payoffs in a fixed order,
// so equal configs yield byte-equal scenarios.
Scenario generate(const ScenarioConfig& config);

// Cost of removing detection d from its time step.
double attack_payoff(const Detection& d);

// Closed form of the DistanceScaled payoff for a detection at distance
// `dist_from_centre` from the scene centre.
double distance_scaled_payoff(const PayoffModel& model, double dist_from_centre);

// Initial tracker state derived from the config (overridable via init_state /
// init_cov_diag).
Vec4 initial_state_vector(const ScenarioConfig& config);
Eigen::Matrix4d initial_covariance(const ScenarioConfig& config);

}  // namespace poses::world
