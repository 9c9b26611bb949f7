// Rigid-body math on SO(3)/SE(3): poses, twists, exp/log maps and the
// Jacobians needed by ICP and pose-graph optimization.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace mlmap {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

/// Tangent-space element of SE(3): axis-angle rotation plus translation part.
struct Twist {
  Vec3 rot = Vec3::Zero();    // radians, axis-angle of so(3)
  Vec3 trans = Vec3::Zero();  // meters

  static Twist Zero() { return {}; }
  bool finite() const { return rot.allFinite() && trans.allFinite(); }

  // Stacked [trans; rot] vector, the ordering used by all 6x6 matrices here.
  Vec6 vector() const {
    Vec6 v;
    v << trans, rot;
    return v;
  }
  static Twist from_vector(const Vec6& v) {
    Twist x;
    x.trans = v.head<3>();
    x.rot = v.tail<3>();
    return x;
  }
  double norm() const { return vector().norm(); }
};

inline Twist operator*(double s, const Twist& x) { return {s * x.rot, s * x.trans}; }
inline Twist operator+(const Twist& a, const Twist& b) { return {a.rot + b.rot, a.trans + b.trans}; }

/// Rigid transform in SE(3) with a timestamp (seconds since dataset epoch).
struct Pose {
  Quat rotation = Quat::Identity();  // stored (w,x,y,z), kept normalized
  Vec3 translation = Vec3::Zero();
  double stamp = 0.0;

  static Pose Identity() { return {}; }

  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static Pose from_matrix(const Mat4& m, double stamp = 0.0) {
    Pose p;
    p.rotation = Quat(Mat3(m.topLeftCorner<3, 3>())).normalized();
    p.translation = m.topRightCorner<3, 1>();
    p.stamp = stamp;
    return p;
  }

  double yaw() const {
    const Mat3 r = rotation_matrix();
    return std::atan2(r(1, 0), r(0, 0));
  }

  static Pose from_xyyaw(double x, double y, double yaw, double z = 0.0, double stamp = 0.0) {
    Pose p;
    p.rotation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
    p.translation = Vec3(x, y, z);
    p.stamp = stamp;
    return p;
  }
};

inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

namespace detail {

// Left Jacobian of SO(3) and its inverse (closed form, Taylor near zero).
inline Mat3 so3_left_jacobian(const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 k = hat(phi);
  if (t < 1e-5) {
    return Mat3::Identity() + 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double a = (1.0 - std::cos(t)) / (t * t);
  const double b = (t - std::sin(t)) / (t * t * t);
  return Mat3::Identity() + a * k + b * k * k;
}

inline Mat3 so3_left_jacobian_inv(const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 k = hat(phi);
  double c;
  if (t < 1e-4) {
    c = 1.0 / 12.0 + t * t / 720.0;
  } else {
    // 1/t^2 - cot(t/2)/(2t), written to stay finite up to t = pi
    c = 1.0 / (t * t) - 1.0 / (2.0 * t * std::tan(0.5 * t));
  }
  return Mat3::Identity() - 0.5 * k + c * k * k;
}

}  // namespace detail

/// SE(3) exponential: screw motion of a twist. Rotation angle = |xi.rot|.
inline Pose exp(const Twist& xi) {
  if (!xi.finite()) throw std::invalid_argument("exp: non-finite twist");
  Pose p;
  const double t = xi.rot.norm();
  if (t < 1e-12) {
    p.rotation = Quat(1.0, 0.5 * xi.rot.x(), 0.5 * xi.rot.y(), 0.5 * xi.rot.z()).normalized();
  } else {
    p.rotation = Quat(Eigen::AngleAxisd(t, xi.rot / t));
  }
  p.translation = detail::so3_left_jacobian(xi.rot) * xi.trans;
  return p;
}

/// Principal-branch SE(3) logarithm, rotation angle in [0, pi].
inline Twist log(const Pose& p) {
  Quat q = p.rotation.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical sign, angle <= pi
  const Vec3 v(q.x(), q.y(), q.z());
  const double s = v.norm();
  Twist xi;
  if (s < 1e-12) {
    xi.rot = 2.0 * v;  // w ~ 1
  } else {
    const double angle = 2.0 * std::atan2(s, q.w());
    xi.rot = (angle / s) * v;
  }
  xi.trans = detail::so3_left_jacobian_inv(xi.rot) * p.translation;
  return xi;
}

inline Pose compose(const Pose& a, const Pose& b) {
  Pose p;
  p.rotation = (a.rotation * b.rotation).normalized();
  p.translation = a.translation + a.rotation * b.translation;
  return p;
}

inline Pose inverse(const Pose& a) {
  Pose p;
  p.rotation = a.rotation.conjugate();
  p.translation = -(p.rotation * a.translation);
  return p;
}

inline Vec3 transform_point(const Pose& t, const Vec3& p) {
  return t.rotation * p + t.translation;
}

/// Geodesic interpolation compose(a, exp(s*log(a^-1 b))); stamp is lerped.
inline Pose interpolate(const Pose& a, const Pose& b, double s) {
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("interpolate: s outside [0,1]");
  Pose p = compose(a, exp(s * log(compose(inverse(a), b))));
  p.stamp = (1.0 - s) * a.stamp + s * b.stamp;
  return p;
}

/// Adjoint of T in the [trans; rot] stacking: [[R, t^ R], [0, R]].
inline Mat6 adjoint(const Pose& t) {
  Mat6 ad = Mat6::Zero();
  const Mat3 r = t.rotation_matrix();
  ad.topLeftCorner<3, 3>() = r;
  ad.topRightCorner<3, 3>() = hat(t.translation) * r;
  ad.bottomRightCorner<3, 3>() = r;
  return ad;
}

/// Conjugate a twist into another frame: xi' = Adj(T) xi.
inline Twist adjoint_apply(const Pose& t, const Twist& xi) {
  return Twist::from_vector(adjoint(t) * xi.vector());
}

namespace detail {

// Q matrix of the SE(3) left Jacobian (Barfoot's closed form).
inline Mat3 se3_q_matrix(const Vec3& rho, const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 rp = hat(rho);
  const Mat3 ph = hat(phi);
  double c1, c2, d;
  if (t < 1e-4) {
    c1 = 1.0 / 6.0 - t * t / 120.0;
    c2 = 1.0 / 24.0 - t * t / 720.0;
    d = -1.0 / 120.0 + t * t / 5040.0;
  } else {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    c1 = (t - std::sin(t)) / t3;
    c2 = (1.0 - 0.5 * t2 - std::cos(t)) / t4;
    d = (t - std::sin(t) - t3 / 6.0) / t5;
  }
  return 0.5 * rp + c1 * (ph * rp + rp * ph + ph * rp * ph) -
         c2 * (ph * ph * rp + rp * ph * ph - 3.0 * ph * rp * ph) -
         0.5 * (c2 - 3.0 * d) * (ph * rp * ph * ph + ph * ph * rp * ph);
}

}  // namespace detail

/// Inverse left Jacobian of SE(3) in the [trans; rot] stacking.
inline Mat6 se3_left_jacobian_inv(const Twist& xi) {
  const Mat3 ji = detail::so3_left_jacobian_inv(xi.rot);
  const Mat3 q = detail::se3_q_matrix(xi.trans, xi.rot);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = ji;
  out.topRightCorner<3, 3>() = -ji * q * ji;
  out.bottomRightCorner<3, 3>() = ji;
  return out;
}

/// Inverse right Jacobian: Jr^-1(xi) = Jl^-1(-xi).
inline Mat6 se3_right_jacobian_inv(const Twist& xi) {
  return se3_left_jacobian_inv({-xi.rot, -xi.trans});
}

/// Rotation angle (radians, in [0, pi]) between two poses.
inline double rotation_distance(const Pose& a, const Pose& b) {
  return log(compose(inverse(a), b)).rot.norm();
}

inline double translation_distance(const Pose& a, const Pose& b) {
  return (a.translation - b.translation).norm();
}

}  // namespace mlmap
