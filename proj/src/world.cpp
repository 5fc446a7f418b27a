#include "poses/world.hpp"

#include "poses/errors.hpp"
#include "poses/rng.hpp"

#include <cmath>
#include <string>

namespace poses::world {

void ScenarioConfig::validate() const {
  if (n_steps < 2) throw ConfigError("n_steps must be >= 2");
  if (misdetect_prob < 0.0 || misdetect_prob > 1.0)
    throw ConfigError("misdetect_prob must lie in [0, 1]");
  if (false_alarm_rate < 0.0) throw ConfigError("false_alarm_rate must be >= 0");
  if (detection_noise_sigma < 0.0) throw ConfigError("detection_noise_sigma must be >= 0");
  if (max_detections_per_step < 1) throw ConfigError("max_detections_per_step must be >= 1");
  if (!(scene_min.x() < scene_max.x() && scene_min.y() < scene_max.y()))
    throw ConfigError("scene box is empty or inverted");
  switch (payoff_model.kind) {
    case PayoffModel::Kind::Constant:
      if (payoff_model.a < 0.0) throw ConfigError("constant payoff must be >= 0");
      break;
    case PayoffModel::Kind::Uniform:
      if (payoff_model.a < 0.0 || payoff_model.b < payoff_model.a)
        throw ConfigError("uniform payoff bounds must satisfy 0 <= a <= b");
      break;
    case PayoffModel::Kind::DistanceScaled:
      if (payoff_model.a < 0.0 || payoff_model.b < 0.0)
        throw ConfigError("distance-scaled payoff coefficients must be >= 0");
      break;
  }
  if (init_cov_diag) {
    for (int i = 0; i < 4; ++i) {
      if (!((*init_cov_diag)(i) > 0.0))
        throw ConfigError("init_cov_diag entries must be > 0");
    }
  }
}

double attack_payoff(const Detection& d) { return d.payoff; }

double distance_scaled_payoff(const PayoffModel& model, double dist_from_centre) {
  return model.a + model.b * dist_from_centre;
}

namespace {

double payoff_for(const PayoffModel& model, const Vec2& z, const Vec2& centre, Rng& rng) {
  switch (model.kind) {
    case PayoffModel::Kind::Constant:
      return model.a;
    case PayoffModel::Kind::Uniform:
      return rng.uniform(model.a, model.b);
    case PayoffModel::Kind::DistanceScaled:
      return distance_scaled_payoff(model, (z - centre).norm());
  }
  return 0.0;
}

}  // namespace

// Draw order per step (fixed; equal seeds give byte-equal scenarios):
//   per vehicle: one detect coin, then two noise normals when sigma > 0;
//   one Poisson clutter count, then two uniforms per clutter return;
//   finally one payoff draw per *kept* detection (Uniform model only).
Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const Vec2 centre = 0.5 * (config.scene_min + config.scene_max);

  Scenario out;
  out.truth.assign(config.vehicles.size(), {});
  out.detections.assign(static_cast<std::size_t>(config.n_steps), {});

  std::vector<Vec2> pos, vel;
  for (const auto& v : config.vehicles) {
    pos.push_back(v.position);
    vel.push_back(v.velocity);
  }

  for (int k = 0; k < config.n_steps; ++k) {
    auto& dets = out.detections[static_cast<std::size_t>(k)];
    for (std::size_t v = 0; v < config.vehicles.size(); ++v) {
      if (k > 0) pos[v] += vel[v];
      auto wp = config.vehicles[v].waypoints.find(k);
      if (wp != config.vehicles[v].waypoints.end()) pos[v] = wp->second;
      out.truth[v].push_back(pos[v]);

      bool detected = rng.uniform() >= config.misdetect_prob;
      if (!detected) continue;
      Vec2 z = pos[v];
      if (config.detection_noise_sigma > 0.0) {
        z.x() += config.detection_noise_sigma * rng.normal();
        z.y() += config.detection_noise_sigma * rng.normal();
      }
      if (static_cast<int>(dets.size()) < config.max_detections_per_step) {
        Detection d;
        d.id = static_cast<int>(dets.size());
        d.z = z;
        d.truth_id = static_cast<int>(v);
        dets.push_back(d);
      }
    }
    int clutter = rng.poisson(config.false_alarm_rate);
    for (int c = 0; c < clutter; ++c) {
      Vec2 z(rng.uniform(config.scene_min.x(), config.scene_max.x()),
             rng.uniform(config.scene_min.y(), config.scene_max.y()));
      if (static_cast<int>(dets.size()) < config.max_detections_per_step) {
        Detection d;
        d.id = static_cast<int>(dets.size());
        d.z = z;
        dets.push_back(d);
      }
    }
    for (auto& d : dets) d.payoff = payoff_for(config.payoff_model, d.z, centre, rng);
  }
  return out;
}

Vec4 initial_state_vector(const ScenarioConfig& config) {
  if (config.init_state) return *config.init_state;
  Vec4 s = Vec4::Zero();
  if (!config.vehicles.empty()) s.head<2>() = config.vehicles[0].position;
  return s;
}

Eigen::Matrix4d initial_covariance(const ScenarioConfig& config) {
  Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
  if (config.init_cov_diag) {
    P.diagonal() = *config.init_cov_diag;
  } else {
    P.diagonal() << 900.0, 900.0, 400.0, 400.0;
  }
  return P;
}

}  // namespace poses::world
