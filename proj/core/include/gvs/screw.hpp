#pragma once

// SE(3) / se(3) operations used throughout the library.
//
// Conventions (fixed project-wide):
//   - twists are ordered [angular; linear], wrenches [moment; force];
//   - poses act on the right: g' = g * hat(xi), g_dot = g * hat(eta);
//   - adjoint_star(g) = adjoint(g)^T and ad_star(t) = ad(t)^T, so that the
//     pairing w^T t is preserved: (adjoint_star(g) w)^T (adjoint(g^-1) t) = w^T t.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gvs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

using Twist = Vec6;
using Wrench = Vec6;

inline Vec3 angular(const Vec6& t) { return t.head<3>(); }
inline Vec3 linear(const Vec6& t) { return t.tail<3>(); }
inline Vec6 make_twist(const Vec3& angular, const Vec3& linear) {
  Vec6 t;
  t << angular, linear;
  return t;
}

// Rigid transformation g = (R, r).
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 r = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose translation(const Vec3& r) { return {Mat3::Identity(), r}; }

  Pose inverse() const { return {R.transpose(), -(R.transpose() * r)}; }
  Mat4 matrix() const;
  Vec3 apply(const Vec3& p) const { return R * p + r; }

  // RᵀR = I and det(R) = 1 within tol.
  bool is_valid(double tol = 1e-10) const;

  friend Pose operator*(const Pose& a, const Pose& b) { return {a.R * b.R, a.R * b.r + a.r}; }
};

Pose pose_from_matrix(const Mat4& m);

Mat3 tilde(const Vec3& v);
Vec3 untilde(const Mat3& m);

Mat4 hat(const Twist& t);
Twist vee(const Mat4& m);

// Closed-form exponential. Below kSmallAngle the trigonometric coefficients
// switch to their truncated series; the closed forms cancel badly near zero.
inline constexpr double kSmallAngle = 1e-2;
Pose exp_se3(const Twist& omega);

// Inverse of exp_se3 for rotation angles strictly below pi.
Twist log_se3(const Pose& g);

Mat6 adjoint(const Pose& g);
// adjoint(g.inverse()) without forming the inverse.
Mat6 adjoint_inverse(const Pose& g);
Mat6 adjoint_star(const Pose& g);

Mat6 ad(const Twist& t);
Mat6 ad_star(const Twist& t);
// ad(a) * b without forming the matrix.
Twist ad_apply(const Twist& a, const Twist& b);

// Right-trivialised tangent of the exponential:
//   d/de exp(hat(Omega(e))) = exp(hat(Omega)) * hat(dexp(Omega) * dOmega/de),
// i.e. the series sum_k (-1)^k ad(Omega)^k / (k+1)!, evaluated in closed form.
Mat6 dexp(const Twist& omega);

// Time derivative of dexp(omega) along omega_dot.
Mat6 dexp_rate(const Twist& omega, const Twist& omega_dot);

// dexp(omega) * m, exploiting the structure of ad (m is 6 x k).
Mat6X dexp_apply(const Twist& omega, const Mat6X& m);

}  // namespace gvs
