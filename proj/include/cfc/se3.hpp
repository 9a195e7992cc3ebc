#pragma once

// Quaternion and pose arithmetic shared by collision, assembly and MPC.
//
// Conventions:
//  * Quaternions are Eigen::Quaternion (constructor order w, x, y, z).
//  * Angular velocities are expressed in the world frame, so a pose advances
//    as q+ = exp(h * omega) * q.
//  * Error metrics are invariant under the q / -q double cover.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

#include "cfc/error.hpp"

namespace cfc {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using UnitQuaternion = Eigen::Quaternion<Scalar>;

inline constexpr double kUnitNormTolerance = 1e-6;

template <typename Scalar>
struct Pose {
  Vector3<Scalar> position = Vector3<Scalar>::Zero();
  UnitQuaternion<Scalar> orientation = UnitQuaternion<Scalar>::Identity();

  Vector3<Scalar> transform(const Vector3<Scalar>& local) const {
    return position + orientation * local;
  }
  Vector3<Scalar> inverse_transform(const Vector3<Scalar>& world) const {
    return orientation.conjugate() * (world - position);
  }
};

using Posed = Pose<double>;

template <typename Scalar>
void require_unit(const UnitQuaternion<Scalar>& q, const char* what) {
  using std::abs;
  if (!(abs(q.norm() - Scalar(1)) <= Scalar(kUnitNormTolerance))) {
    throw InvalidArgument(std::string(what) + ": quaternion is not unit-norm");
  }
}

/// 1 - (q1 . q2)^2, the quaternion distance used for costs and success tests.
template <typename Scalar>
Scalar quat_error(const UnitQuaternion<Scalar>& q1, const UnitQuaternion<Scalar>& q2) {
  require_unit(q1, "quat_error");
  require_unit(q2, "quat_error");
  const Scalar d = q1.dot(q2);
  return Scalar(1) - d * d;
}

/// Rotation angle between two orientations, in [0, pi].
template <typename Scalar>
Scalar quat_angle(const UnitQuaternion<Scalar>& q1, const UnitQuaternion<Scalar>& q2) {
  require_unit(q1, "quat_angle");
  require_unit(q2, "quat_angle");
  const Scalar d = q1.dot(q2);
  const Scalar c = std::clamp<Scalar>(Scalar(2) * d * d - Scalar(1), Scalar(-1), Scalar(1));
  using std::acos;
  return acos(c);
}

/// Exponential map of a rotation vector.
template <typename Scalar>
UnitQuaternion<Scalar> quat_exp(const Vector3<Scalar>& theta) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar a2 = theta.squaredNorm();
  const Scalar a = sqrt(a2);
  Scalar w;
  Scalar s_over_a;
  if (a < Scalar(1e-6)) {
    w = Scalar(1) - a2 / Scalar(8);
    s_over_a = Scalar(0.5) - a2 / Scalar(48);
  } else {
    w = cos(a / Scalar(2));
    s_over_a = sin(a / Scalar(2)) / a;
  }
  const Vector3<Scalar> v = s_over_a * theta;
  return UnitQuaternion<Scalar>(w, v.x(), v.y(), v.z());
}

/// d quat_exp(theta) / d theta as a 4x3 matrix, rows ordered (w, x, y, z).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 3> quat_exp_jacobian(const Vector3<Scalar>& theta) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar a2 = theta.squaredNorm();
  const Scalar a = sqrt(a2);
  Scalar s_over_a;
  Scalar ds_term;  // (d(s/a)/da) / a
  if (a < Scalar(1e-4)) {
    s_over_a = Scalar(0.5) - a2 / Scalar(48);
    ds_term = Scalar(-1) / Scalar(24) + a2 / Scalar(960);
  } else {
    const Scalar s = sin(a / Scalar(2));
    const Scalar c = cos(a / Scalar(2));
    s_over_a = s / a;
    ds_term = (c * a / Scalar(2) - s) / (a2 * a);
  }
  Eigen::Matrix<Scalar, 4, 3> jac;
  jac.row(0) = -(s_over_a / Scalar(2)) * theta.transpose();
  jac.template bottomRows<3>() =
      s_over_a * Matrix3<Scalar>::Identity() + ds_term * theta * theta.transpose();
  return jac;
}

/// Coefficients as (w, x, y, z).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> wxyz(const UnitQuaternion<Scalar>& q) {
  return Eigen::Matrix<Scalar, 4, 1>(q.w(), q.x(), q.y(), q.z());
}

template <typename Scalar>
UnitQuaternion<Scalar> from_wxyz(const Eigen::Matrix<Scalar, 4, 1>& c) {
  return UnitQuaternion<Scalar>(c(0), c(1), c(2), c(3));
}

/// Matrix L(p) with wxyz(p * q) = L(p) wxyz(q).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> quat_left_matrix(const UnitQuaternion<Scalar>& p) {
  Eigen::Matrix<Scalar, 4, 4> m;
  m << p.w(), -p.x(), -p.y(), -p.z(),
       p.x(),  p.w(), -p.z(),  p.y(),
       p.y(),  p.z(),  p.w(), -p.x(),
       p.z(), -p.y(),  p.x(),  p.w();
  return m;
}

/// Matrix R(q) with wxyz(p * q) = R(q) wxyz(p).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> quat_right_matrix(const UnitQuaternion<Scalar>& q) {
  Eigen::Matrix<Scalar, 4, 4> m;
  m << q.w(), -q.x(), -q.y(), -q.z(),
       q.x(),  q.w(),  q.z(), -q.y(),
       q.y(), -q.z(),  q.w(),  q.x(),
       q.z(),  q.y(), -q.x(),  q.w();
  return m;
}

/// Advances a pose by a world-frame twist (linear, angular) over h seconds.
template <typename Scalar>
Pose<Scalar> integrate_pose(const Pose<Scalar>& pose, const Vector3<Scalar>& linear,
                            const Vector3<Scalar>& angular, Scalar h) {
  Pose<Scalar> out;
  out.position = pose.position + h * linear;
  out.orientation = quat_exp<Scalar>(h * angular) * pose.orientation;
  out.orientation.normalize();
  return out;
}

/// Smooth upper bound of max(x, 0); the gap to max(x, 0) never exceeds ln2 / gamma.
template <typename Scalar>
Scalar softplus(Scalar x, Scalar gamma) {
  using std::exp;
  using std::log1p;
  const Scalar gx = gamma * x;
  if (gx > Scalar(30)) return x + log1p(exp(-gx)) / gamma;
  return log1p(exp(gx)) / gamma;
}

/// Derivative of softplus with respect to x.
template <typename Scalar>
Scalar softplus_slope(Scalar x, Scalar gamma) {
  using std::exp;
  const Scalar gx = gamma * x;
  if (gx >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-gx));
  const Scalar e = exp(gx);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Matrix3<Scalar> skew(const Vector3<Scalar>& v) {
  Matrix3<Scalar> m;
  m << Scalar(0), -v.z(), v.y(),
       v.z(), Scalar(0), -v.x(),
       -v.y(), v.x(), Scalar(0);
  return m;
}

/// Roll-pitch-yaw (extrinsic x, y, z) to quaternion: Rz(yaw) * Ry(pitch) * Rx(roll).
template <typename Scalar>
UnitQuaternion<Scalar> rpy_to_quat(Scalar roll, Scalar pitch, Scalar yaw) {
  using AA = Eigen::AngleAxis<Scalar>;
  UnitQuaternion<Scalar> q = UnitQuaternion<Scalar>(AA(yaw, Vector3<Scalar>::UnitZ())) *
                             UnitQuaternion<Scalar>(AA(pitch, Vector3<Scalar>::UnitY())) *
                             UnitQuaternion<Scalar>(AA(roll, Vector3<Scalar>::UnitX()));
  q.normalize();
  return q;
}

template <typename Scalar>
UnitQuaternion<Scalar> axis_angle_to_quat(const Vector3<Scalar>& axis, Scalar angle) {
  const Scalar n = axis.norm();
  if (n <= Scalar(0)) return UnitQuaternion<Scalar>::Identity();
  UnitQuaternion<Scalar> q(Eigen::AngleAxis<Scalar>(angle, axis / n));
  q.normalize();
  return q;
}

/// Yaw of the rotated x axis projected on the ground plane.
template <typename Scalar>
Scalar heading(const UnitQuaternion<Scalar>& q) {
  using std::atan2;
  const Vector3<Scalar> x = q * Vector3<Scalar>::UnitX();
  return atan2(x.y(), x.x());
}

}  // namespace cfc
