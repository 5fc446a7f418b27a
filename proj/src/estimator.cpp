#include "poses/estimator.hpp"

#include "poses/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace poses::est {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

Mat2 invert_innovation(const Mat2& S) {
  double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
  if (!(std::abs(det) > 1e-12) || !std::isfinite(det)) {
    throw SingularInnovation("innovation covariance is singular (det=" +
                             std::to_string(det) + ")");
  }
  Mat2 inv;
  inv << S(1, 1), -S(0, 1), -S(1, 0), S(0, 0);
  return inv / det;
}

}  // namespace

void ModelParams::rebuild() {
  F = Mat4::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;

  H = Mat24::Zero();
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;

  double q = sigma_q * sigma_q;
  double dt2 = dt * dt;
  double dt3 = dt2 * dt;
  Q = Mat4::Zero();
  Q.topLeftCorner<2, 2>() = (q * dt3 / 3.0) * Mat2::Identity();
  Q.topRightCorner<2, 2>() = (q * dt2 / 2.0) * Mat2::Identity();
  Q.bottomLeftCorner<2, 2>() = (q * dt2 / 2.0) * Mat2::Identity();
  Q.bottomRightCorner<2, 2>() = q * Mat2::Identity();

  R = (sigma_r * sigma_r) * Mat2::Identity();
}

ModelParams ModelParams::from_sigmas(double sigma_q, double sigma_r, double dt) {
  ModelParams p;
  p.sigma_q = sigma_q;
  p.sigma_r = sigma_r;
  p.dt = dt;
  p.rebuild();
  return p;
}

bool is_symmetric(const Mat4& m, double tol) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const Mat4& m, double tol) {
  if (!is_symmetric(m, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Mat4> solver(m);
  return solver.eigenvalues().minCoeff() >= -tol;
}

FilterState predict(const FilterState& state, const ModelParams& params) {
  FilterState out;
  out.s = params.F * state.s;
  out.P = params.F * state.P * params.F.transpose() + params.Q;
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  out.step = state.step + 1;
  return out;
}

Innovation innovation(const FilterState& pred, const ModelParams& params) {
  Innovation inn;
  inn.S = params.H * pred.P * params.H.transpose() + params.R;
  inn.K = pred.P * params.H.transpose() * invert_innovation(inn.S);
  return inn;
}

Innovation innovation(const FilterState& pred, const Vec2& z, const ModelParams& params) {
  Innovation inn = innovation(pred, params);
  inn.y = z - params.H * pred.s;
  return inn;
}

std::pair<FilterState, Innovation> update(const FilterState& pred, const Vec2& z,
                                          const ModelParams& params) {
  Innovation inn = innovation(pred, z, params);
  FilterState out;
  out.s = pred.s + inn.K * inn.y;
  out.P = ((Mat4::Identity() - inn.K * params.H) * pred.P).eval();
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  out.step = pred.step;
  return {out, inn};
}

double mahalanobis(const Vec2& z, const FilterState& pred, const Innovation& innov,
                   const ModelParams& params) {
  Vec2 y = z - params.H * pred.s;
  return std::sqrt(y.dot(invert_innovation(innov.S) * y));
}

double uncertainty_trace(const FilterState& state) {
  return state.P(0, 0) + state.P(1, 1);
}

int monitor_gamma(double tau_prev, double tau_cur) {
  return tau_cur <= tau_prev ? 1 : 0;
}

std::optional<world::Detection> gnn_associate(const std::vector<world::Detection>& detections,
                                              const FilterState& pred, const Innovation& innov,
                                              const ModelParams& params) {
  std::optional<world::Detection> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& d : detections) {
    double dist = mahalanobis(d.z, pred, innov, params);
    if (dist > params.gate) continue;
    if (!best || dist < best_dist || (dist == best_dist && d.id < best->id)) {
      best = d;
      best_dist = dist;
    }
  }
  return best;
}

double gaussian_likelihood(const Vec2& y, const Mat2& S) {
  double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw SingularInnovation("innovation covariance is not positive definite");
  }
  double quad = y.dot(invert_innovation(S) * y);
  return std::exp(-0.5 * quad) / (kTwoPi * std::sqrt(det));
}

TrackSet joint_predict(const TrackSet& tracks, const ModelParams& params) {
  TrackSet out;
  out.primary = predict(tracks.primary, params);
  out.refiners.reserve(tracks.refiners.size());
  for (const auto& r : tracks.refiners) out.refiners.push_back(predict(r, params));
  out.unassociated_prev = tracks.unassociated_prev;
  return out;
}

JointAssignment joint_associate(const TrackSet& predicted,
                                const std::vector<world::Detection>& detections,
                                const ModelParams& params, bool primary_active) {
  const std::size_t n_tracks = 1 + predicted.refiners.size();

  struct Pair {
    double likelihood;
    int det_id;
    std::size_t track;
    std::size_t det_index;
  };
  std::vector<Pair> pairs;
  for (std::size_t t = 0; t < n_tracks; ++t) {
    if (t == 0 && !primary_active) continue;
    const FilterState& track = t == 0 ? predicted.primary : predicted.refiners[t - 1];
    Innovation inn = innovation(track, params);
    for (std::size_t j = 0; j < detections.size(); ++j) {
      if (mahalanobis(detections[j].z, track, inn, params) > params.gate) continue;
      Vec2 y = detections[j].z - params.H * track.s;
      pairs.push_back({gaussian_likelihood(y, inn.S), detections[j].id, t, j});
    }
  }
  // Highest likelihood first; ties prefer the lower detection id, then the
  // main track / earlier refiner.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.likelihood != b.likelihood) return a.likelihood > b.likelihood;
    if (a.det_id != b.det_id) return a.det_id < b.det_id;
    return a.track < b.track;
  });

  JointAssignment out;
  out.detection_of_track.assign(n_tracks, std::nullopt);
  std::vector<bool> det_taken(detections.size(), false);
  for (const auto& p : pairs) {
    if (out.detection_of_track[p.track] || det_taken[p.det_index]) continue;
    out.detection_of_track[p.track] = static_cast<int>(p.det_index);
    det_taken[p.det_index] = true;
  }
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!det_taken[j]) out.unassigned_detections.push_back(static_cast<int>(j));
  }
  return out;
}

TrackSet joint_apply(const TrackSet& predicted,
                     const std::vector<world::Detection>& detections,
                     const JointAssignment& assignment, const ModelParams& params) {
  TrackSet out;
  auto updated = [&](const FilterState& track, std::optional<int> det) {
    if (!det) return track;
    return update(track, detections[static_cast<std::size_t>(*det)].z, params).first;
  };

  out.primary = updated(predicted.primary, assignment.detection_of_track[0]);
  for (std::size_t r = 0; r < predicted.refiners.size(); ++r) {
    out.refiners.push_back(updated(predicted.refiners[r], assignment.detection_of_track[r + 1]));
  }

  // Unassigned returns near the main track either continue a return stored at
  // the previous step (spawning a refiner whose velocity is the displacement)
  // or are stored for matching at the next step.
  Mat4 p0 = Mat4::Zero();
  p0.diagonal() << 900.0, 900.0, 400.0, 400.0;
  for (int j : assignment.unassigned_detections) {
    const world::Detection& d = detections[static_cast<std::size_t>(j)];
    if ((d.z - out.primary.position()).norm() > params.refine_radius) {
      out.unassociated_prev.push_back(d);
      continue;
    }
    const world::Detection* origin = nullptr;
    double best = params.spawn_speed_max;
    for (const auto& prev : predicted.unassociated_prev) {
      double hop = (d.z - prev.z).norm();
      if (hop < best) {
        best = hop;
        origin = &prev;
      }
    }
    if (origin) {
      FilterState refiner;
      refiner.s << d.z(0), d.z(1), d.z(0) - origin->z(0), d.z(1) - origin->z(1);
      refiner.P = p0;
      refiner.step = predicted.primary.step;
      out.refiners.push_back(refiner);
    } else {
      out.unassociated_prev.push_back(d);
    }
  }

  // Refiners that wandered away from the main track no longer refine anything.
  std::erase_if(out.refiners, [&](const FilterState& r) {
    return (r.position() - out.primary.position()).norm() > params.refine_radius;
  });
  return out;
}

TrackSet joint_step(const TrackSet& predicted,
                    const std::vector<world::Detection>& detections,
                    const ModelParams& params) {
  return joint_apply(predicted, detections, joint_associate(predicted, detections, params),
                     params);
}

}  // namespace poses::est
