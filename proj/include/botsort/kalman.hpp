#pragma once

#include <Eigen/Core>

#include "botsort/affine.hpp"
#include "botsort/geometry.hpp"

namespace botsort {

using Vector4 = Eigen::Matrix<double, 4, 1>;
using Vector8 = Eigen::Matrix<double, 8, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

/// Noise factors of the constant-velocity box filter. Q and R scale with box extent.
struct KfParams {
  double sigma_p = 0.05;
  double sigma_v = 0.00625;
  double sigma_m = 0.05;
  double dt = 1.0;

  void validate() const;
};

/// Measured box (x_c, y_c, w, h).
struct Measurement {
  Vector4 z;

  static Measurement from_box(const BBox& b);
  void validate() const;
};

/// State (x_c, y_c, w, h, vx_c, vy_c, vw, vh) with its covariance.
struct KalmanState {
  Vector8 mean = Vector8::Zero();
  Matrix8 cov = Matrix8::Identity();

  /// Box at the current mean. Throws InvalidBoxError if the extent collapsed.
  BBox box() const;
};

KalmanState initiate(const Measurement& m, const KfParams& p);

/// Process noise from the posterior extent of `prev`.
Matrix8 make_Q(const KalmanState& prev, const KfParams& p);

/// Measurement noise from the measured extent.
Matrix4 make_R(const Measurement& m, const KfParams& p);

/// Constant-velocity prediction. `shape_frozen` zeroes the extent velocities first.
KalmanState predict(const KalmanState& s, const KfParams& p, bool shape_frozen = false);

/// Moves a predicted state into the next frame's coordinates: mean <- M~ mean + T~,
/// and cov <- M~ cov M~^T when `correct_cov` is set. M~ repeats M on each of the four
/// (x, y) pairs; T only moves the center.
KalmanState apply_warp(const KalmanState& s, const AffineWarp& warp, bool correct_cov = true);

KalmanState update(const KalmanState& s, const Measurement& m, const KfParams& p);

}  // namespace botsort
