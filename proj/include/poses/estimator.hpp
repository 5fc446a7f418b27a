#pragma once

#include "poses/world.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace poses::est {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;
using Mat42 = Eigen::Matrix<double, 4, 2>;

// Near-constant-velocity model in the plane. State s = (x, y, vx, vy).
struct ModelParams {
  double sigma_q = 3.0;       // process noise intensity
  double sigma_r = 5.0;       // measurement noise std dev
  double dt = 1.0;            // step length
  double gate = 2.0;          // association gate, in Mahalanobis distance
  double trace_halt = 2000.0; // abandon a track whose posterior position
                              // uncertainty trace exceeds this
  double refine_radius = 50.0;   // joint mode: radius around the main track
                                 // within which refiner tracks live
  double spawn_speed_max = 20.0; // joint mode: max per-step displacement that
                                 // still spawns a refiner from a stored return

  Mat4 F = Mat4::Identity();  // state transition
  Mat24 H = Mat24::Zero();    // observation
  Mat4 Q = Mat4::Zero();      // process noise covariance
  Mat2 R = Mat2::Zero();      // measurement noise covariance

  ModelParams() { rebuild(); }

  // Recomputes F, H, Q, R from the scalar parameters.
  void rebuild();

  static ModelParams from_sigmas(double sigma_q, double sigma_r, double dt = 1.0);
};

struct FilterState {
  Vec4 s = Vec4::Zero();
  Mat4 P = Mat4::Zero();
  int step = 0;

  Vec2 position() const { return s.head<2>(); }
  Vec2 velocity() const { return s.tail<2>(); }
};

// Covariance hygiene checks used by the test suite and by debug assertions.
bool is_symmetric(const Mat4& m, double tol = 1e-9);
bool is_psd(const Mat4& m, double tol = 1e-9);

// Innovation quantities of a predicted state: covariance S = H·P·Hᵀ + R and
// gain K = P·Hᵀ·S⁻¹ depend only on the prediction; the residual y = z − H·ŝ
// is filled when a measurement is supplied.
struct Innovation {
  Vec2 y = Vec2::Zero();
  Mat2 S = Mat2::Zero();
  Mat42 K = Mat42::Zero();
};

// Time update: s ← F·s, P ← F·P·Fᵀ + Q, step ← step + 1.
FilterState predict(const FilterState& state, const ModelParams& params);

// S and K of a predicted state (y left zero). Throws SingularInnovation when
// S is not invertible.
Innovation innovation(const FilterState& pred, const ModelParams& params);

// Full innovation of measurement z against predicted state `pred`.
Innovation innovation(const FilterState& pred, const Vec2& z, const ModelParams& params);

// Measurement update of a predicted state; returns the posterior and the
// innovation used. P is re-symmetrized to keep the PSD invariant under
// floating-point drift.
std::pair<FilterState, Innovation> update(const FilterState& pred, const Vec2& z,
                                          const ModelParams& params);

// Mahalanobis distance sqrt(yᵀ·S⁻¹·y) of z from the predicted measurement,
// reusing the S of a previously computed innovation (S is measurement-
// independent, so one Innovation serves a whole detection set).
double mahalanobis(const Vec2& z, const FilterState& pred, const Innovation& innov,
                   const ModelParams& params);

// Trace of the position block of P — the monitor variable τ.
double uncertainty_trace(const FilterState& state);

// Runtime monitor: 1 when the uncertainty did not grow (τ_cur ≤ τ_prev).
int monitor_gamma(double tau_prev, double tau_cur);

// Gated-nearest-neighbour association: the detection with minimal Mahalanobis
// distance among those within params.gate; ties break on lowest id. Empty
// when nothing passes the gate (caller skips the update).
std::optional<world::Detection> gnn_associate(const std::vector<world::Detection>& detections,
                                              const FilterState& pred, const Innovation& innov,
                                              const ModelParams& params);

// Likelihood N(y; 0, S) of an innovation — the joint association weight.
double gaussian_likelihood(const Vec2& y, const Mat2& S);

// ---------------------------------------------------------------------------
// Joint mode: the main track plus short-lived refiner tracks that absorb
// nearby non-target returns, plus the unassociated returns of the previous
// step (candidates for spawning refiners).

struct TrackSet {
  FilterState primary;
  std::vector<FilterState> refiners;
  std::vector<world::Detection> unassociated_prev;
};

// Time update of every track in the set.
TrackSet joint_predict(const TrackSet& tracks, const ModelParams& params);

// One-to-one assignment chosen greedily by descending Gaussian likelihood
// over all gated (track, detection) pairs; ties break on lower detection id,
// then on lower track index (the main track is index 0). Setting
// primary_active = false keeps the main track out of the assignment (used
// when it has been abandoned and only coasts).
struct JointAssignment {
  std::vector<std::optional<int>> detection_of_track;  // [0] = main track
  std::vector<int> unassigned_detections;              // indices, ascending
};
JointAssignment joint_associate(const TrackSet& predicted,
                                const std::vector<world::Detection>& detections,
                                const ModelParams& params, bool primary_active = true);

// Applies an assignment to a *predicted* track set: measurement updates,
// refiner spawning from stored unassociated returns (displacement below
// spawn_speed_max becomes the initial velocity), carrying unmatched returns
// near the main track into unassociated_prev, and pruning refiners that
// drifted more than refine_radius from the main track.
TrackSet joint_apply(const TrackSet& predicted,
                     const std::vector<world::Detection>& detections,
                     const JointAssignment& assignment, const ModelParams& params);

// Convenience: associate + apply on an already predicted set.
TrackSet joint_step(const TrackSet& predicted,
                    const std::vector<world::Detection>& detections,
                    const ModelParams& params);

}  // namespace poses::est
