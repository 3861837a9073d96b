#include "gvs/screw.hpp"

#include <algorithm>
#include <cmath>

namespace gvs {

namespace {

// Below this angle the dexp coefficients use their Taylor expansions; the
// closed forms divide by up to theta^7 and lose digits well before 1e-8.
constexpr double kDexpSeriesAngle = 0.25;

struct DexpCoefficients {
  double c[5];  // c[1..4]: T = I + sum c_k ad^k
  double g[5];  // g[1..4]: (dc_k / dtheta) / theta
};

DexpCoefficients dexp_coefficients(double theta) {
  DexpCoefficients k{};
  const double t2 = theta * theta;
  if (theta < kDexpSeriesAngle) {
    const double t4 = t2 * t2, t6 = t4 * t2, t8 = t4 * t4;
    k.c[1] = -0.5 + t4 / 720.0 - t6 / 20160.0 + t8 / 1209600.0;
    k.c[2] = 1.0 / 6.0 - t4 / 5040.0 + t6 / 181440.0 - t8 / 13305600.0;
    k.c[3] = -1.0 / 24.0 + t2 / 360.0 - t4 / 13440.0 + t6 / 907200.0 - t8 / 95800320.0;
    k.c[4] = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0 - t6 / 9979200.0 + t8 / 1245404160.0;
    k.g[1] = t2 / 180.0 - t4 / 3360.0 + t6 / 151200.0 - t8 / 11975040.0;
    k.g[2] = -t2 / 1260.0 + t4 / 30240.0 - t6 / 1663200.0 + t8 / 155675520.0;
    k.g[3] = 1.0 / 180.0 - t2 / 3360.0 + t4 / 151200.0 - t6 / 11975040.0 + t8 / 1452971520.0;
    k.g[4] = -1.0 / 1260.0 + t2 / 30240.0 - t4 / 1663200.0 + t6 / 155675520.0 -
             t8 / 21794572800.0;
    return k;
  }
  const double s = std::sin(theta), c = std::cos(theta);
  const double t3 = t2 * theta, t4 = t2 * t2, t5 = t4 * theta, t6 = t4 * t2, t7 = t6 * theta;
  k.c[1] = (theta * s + 4.0 * c - 4.0) / (2.0 * t2);
  k.c[2] = (theta * (c + 4.0) - 5.0 * s) / (2.0 * t3);
  k.c[3] = (0.5 * theta * s + c - 1.0) / t4;
  k.c[4] = (theta * (c + 2.0) - 3.0 * s) / (2.0 * t5);
  const double num_a = t2 * c - 5.0 * theta * s - 8.0 * c + 8.0;
  const double num_b = -t2 * s - 7.0 * theta * c - 8.0 * theta + 15.0 * s;
  k.g[1] = num_a / (2.0 * t4);
  k.g[2] = num_b / (2.0 * t5);
  k.g[3] = num_a / (2.0 * t6);
  k.g[4] = num_b / (2.0 * t7);
  return k;
}

// ad(a) applied column-wise.
Mat6X ad_apply_cols(const Vec3& w, const Vec3& v, const Mat6X& m) {
  Mat6X out(6, m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Vec3 a = m.col(j).head<3>();
    const Vec3 b = m.col(j).tail<3>();
    out.col(j).head<3>() = w.cross(a);
    out.col(j).tail<3>() = v.cross(a) + w.cross(b);
  }
  return out;
}

}  // namespace

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = R;
  m.topRightCorner<3, 1>() = r;
  return m;
}

bool Pose::is_valid(double tol) const {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol && r.allFinite();
}

Pose pose_from_matrix(const Mat4& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Mat3 tilde(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 untilde(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat4 hat(const Twist& t) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = tilde(angular(t));
  m.topRightCorner<3, 1>() = linear(t);
  return m;
}

Twist vee(const Mat4& m) {
  return make_twist(untilde(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>());
}

Pose exp_se3(const Twist& omega) {
  const Vec3 w = angular(omega);
  const Vec3 v = linear(omega);
  const double theta = w.norm();
  double a, b, c;  // sin(t)/t, (1-cos t)/t^2, (t - sin t)/t^3
  if (theta < kSmallAngle) {
    const double t2 = theta * theta, t4 = t2 * t2, t6 = t4 * t2;
    a = 1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0;
    b = 0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0;
    c = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0;
  } else {
    const double s = std::sin(theta), co = std::cos(theta);
    a = s / theta;
    b = (1.0 - co) / (theta * theta);
    c = (theta - s) / (theta * theta * theta);
  }
  const Mat3 W = tilde(w);
  const Mat3 W2 = W * W;
  Pose g;
  g.R = Mat3::Identity() + a * W + b * W2;
  g.r = v + b * (W * v) + c * (W2 * v);
  return g;
}

Twist log_se3(const Pose& g) {
  const double cos_theta = std::clamp((g.R.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  Vec3 w;
  double d;  // coefficient of W^2 in V^-1
  if (theta < 1e-6) {
    w = 0.5 * untilde(g.R - g.R.transpose());
    d = 1.0 / 12.0;
  } else {
    const double s = std::sin(theta);
    w = theta / (2.0 * s) * untilde(g.R - g.R.transpose());
    d = (1.0 - theta * s / (2.0 * (1.0 - cos_theta))) / (theta * theta);
  }
  const Mat3 W = tilde(w);
  const Vec3 v = g.r - 0.5 * (W * g.r) + d * (W * (W * g.r));
  return make_twist(w, v);
}

Mat6 adjoint(const Pose& g) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = g.R;
  m.bottomRightCorner<3, 3>() = g.R;
  m.bottomLeftCorner<3, 3>() = tilde(g.r) * g.R;
  return m;
}

Mat6 adjoint_inverse(const Pose& g) {
  Mat6 m = Mat6::Zero();
  const Mat3 Rt = g.R.transpose();
  m.topLeftCorner<3, 3>() = Rt;
  m.bottomRightCorner<3, 3>() = Rt;
  m.bottomLeftCorner<3, 3>() = -Rt * tilde(g.r);
  return m;
}

Mat6 adjoint_star(const Pose& g) { return adjoint(g).transpose(); }

Mat6 ad(const Twist& t) {
  Mat6 m = Mat6::Zero();
  const Mat3 W = tilde(angular(t));
  m.topLeftCorner<3, 3>() = W;
  m.bottomRightCorner<3, 3>() = W;
  m.bottomLeftCorner<3, 3>() = tilde(linear(t));
  return m;
}

Mat6 ad_star(const Twist& t) { return ad(t).transpose(); }

Twist ad_apply(const Twist& a, const Twist& b) {
  const Vec3 w = angular(a), v = linear(a);
  const Vec3 bw = angular(b), bv = linear(b);
  return make_twist(w.cross(bw), v.cross(bw) + w.cross(bv));
}

Mat6 dexp(const Twist& omega) {
  const auto k = dexp_coefficients(angular(omega).norm());
  const Mat6 A = ad(omega);
  const Mat6 A2 = A * A;
  const Mat6 A3 = A2 * A;
  const Mat6 A4 = A2 * A2;
  return Mat6::Identity() + k.c[1] * A + k.c[2] * A2 + k.c[3] * A3 + k.c[4] * A4;
}

Mat6X dexp_apply(const Twist& omega, const Mat6X& m) {
  const Vec3 w = angular(omega), v = linear(omega);
  const auto k = dexp_coefficients(w.norm());
  Mat6X x = ad_apply_cols(w, v, m);
  Mat6X out = m + k.c[1] * x;
  x = ad_apply_cols(w, v, x);
  out += k.c[2] * x;
  x = ad_apply_cols(w, v, x);
  out += k.c[3] * x;
  x = ad_apply_cols(w, v, x);
  out += k.c[4] * x;
  return out;
}

Mat6 dexp_rate(const Twist& omega, const Twist& omega_dot) {
  const auto k = dexp_coefficients(angular(omega).norm());
  const double wdot = angular(omega).dot(angular(omega_dot));
  const Mat6 A = ad(omega);
  const Mat6 B = ad(omega_dot);
  const Mat6 A2 = A * A;
  const Mat6 A3 = A2 * A;
  const Mat6 A4 = A2 * A2;
  const Mat6 AB = A * B;
  const Mat6 BA = B * A;
  const Mat6 d2 = BA + AB;
  const Mat6 d3 = BA * A + A * BA + A * AB;
  // d3 * A supplies the first three terms of B A^3 + A B A^2 + A^2 B A + A^3 B.
  const Mat6 d4 = d3 * A + A3 * B;
  return wdot * (k.g[1] * A + k.g[2] * A2 + k.g[3] * A3 + k.g[4] * A4) + k.c[1] * B +
         k.c[2] * d2 + k.c[3] * d3 + k.c[4] * d4;
}

}  // namespace gvs
