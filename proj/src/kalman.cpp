#include "botsort/kalman.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "botsort/error.hpp"

namespace botsort {

namespace {

Matrix8 transition(double dt) {
  Matrix8 f = Matrix8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = dt;
  return f;
}

void symmetrize(Matrix8& m) { m = (0.5 * (m + m.transpose())).eval(); }

}  // namespace

void KfParams::validate() const {
  if (!(sigma_p > 0.0 && sigma_v > 0.0 && sigma_m > 0.0 && dt > 0.0)) {
    throw InvalidArgumentError("Kalman noise factors and dt must be strictly positive");
  }
}

Measurement Measurement::from_box(const BBox& b) {
  const CenterBox c = to_center(b);
  return {Vector4(c.xc, c.yc, c.w, c.h)};
}

void Measurement::validate() const {
  if (!z.allFinite() || !(z(2) > 0.0) || !(z(3) > 0.0)) {
    throw InvalidBoxError("measurement must be finite with positive extent");
  }
}

BBox KalmanState::box() const { return from_center({mean(0), mean(1), mean(2), mean(3)}); }

KalmanState initiate(const Measurement& m, const KfParams& p) {
  m.validate();
  p.validate();
  const double w = m.z(2);
  const double h = m.z(3);

  KalmanState s;
  s.mean << m.z, Vector4::Zero();
  Vector8 std_dev;
  std_dev << 2 * p.sigma_p * w, 2 * p.sigma_p * h, 2 * p.sigma_p * w, 2 * p.sigma_p * h,
      10 * p.sigma_v * w, 10 * p.sigma_v * h, 10 * p.sigma_v * w, 10 * p.sigma_v * h;
  s.cov = std_dev.array().square().matrix().asDiagonal();
  return s;
}

Matrix8 make_Q(const KalmanState& prev, const KfParams& p) {
  const double w = prev.mean(2);
  const double h = prev.mean(3);
  Vector8 std_dev;
  std_dev << p.sigma_p * w, p.sigma_p * h, p.sigma_p * w, p.sigma_p * h, p.sigma_v * w, p.sigma_v * h,
      p.sigma_v * w, p.sigma_v * h;
  return std_dev.array().square().matrix().asDiagonal();
}

Matrix4 make_R(const Measurement& m, const KfParams& p) {
  const double w = m.z(2);
  const double h = m.z(3);
  Vector4 std_dev(p.sigma_m * w, p.sigma_m * h, p.sigma_m * w, p.sigma_m * h);
  return std_dev.array().square().matrix().asDiagonal();
}

KalmanState predict(const KalmanState& s, const KfParams& p, bool shape_frozen) {
  const Matrix8 f = transition(p.dt);
  Vector8 mean = s.mean;
  if (shape_frozen) {
    mean(6) = 0.0;
    mean(7) = 0.0;
  }
  KalmanState out;
  out.mean = f * mean;
  out.cov = f * s.cov * f.transpose() + make_Q(s, p);
  symmetrize(out.cov);
  return out;
}

KalmanState apply_warp(const KalmanState& s, const AffineWarp& warp, bool correct_cov) {
  warp.validate();
  Eigen::Matrix2d m;
  m << warp.a11, warp.a12, warp.a21, warp.a22;

  Matrix8 big = Matrix8::Zero();
  for (int b = 0; b < 4; ++b) big.block<2, 2>(2 * b, 2 * b) = m;

  KalmanState out;
  out.mean = big * s.mean;
  out.mean(0) += warp.a13;
  out.mean(1) += warp.a23;
  if (correct_cov) {
    out.cov = big * s.cov * big.transpose();
    symmetrize(out.cov);
  } else {
    out.cov = s.cov;
  }
  return out;
}

KalmanState update(const KalmanState& s, const Measurement& m, const KfParams& p) {
  m.validate();
  // H selects the first four state components, so H P H^T and P H^T are blocks of P.
  const Eigen::Matrix<double, 8, 4> pht = s.cov.leftCols<4>();
  const Matrix4 innovation_cov = s.cov.topLeftCorner<4, 4>() + make_R(m, p);

  const Eigen::LLT<Matrix4> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("innovation covariance is not positive definite");
  }
  const Eigen::Matrix<double, 8, 4> gain = llt.solve(pht.transpose()).transpose();
  const Vector4 innovation = m.z - s.mean.head<4>();

  KalmanState out;
  out.mean = s.mean + gain * innovation;
  out.cov = s.cov - gain * pht.transpose();
  symmetrize(out.cov);
  if (!out.mean.allFinite() || !out.cov.allFinite()) {
    throw NumericError("Kalman update produced non-finite values");
  }
  return out;
}

}  // namespace botsort
