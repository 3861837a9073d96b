#include "gvs/chain.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <Eigen/Cholesky>

#include "gvs/error.hpp"

namespace gvs {

double HardeningStiffness::wall_torque(double theta) const {
  return k_wall * std::pow(theta / theta_limit, exponent);
}

void HardeningStiffness::validate() const {
  if (!(k0 >= 0.0) || !(k_wall >= 0.0)) throw InvalidSpec("hardening: stiffness must be non-negative");
  if (!(k0 > 0.0 || k_wall > 0.0)) throw InvalidSpec("hardening: torque law must be strictly increasing");
  if (!(theta_limit > 0.0)) throw InvalidSpec("hardening: theta_limit must be positive");
  if (exponent < 1 || exponent % 2 == 0) throw InvalidSpec("hardening: exponent must be an odd positive integer");
}

int JointSpec::dof() const {
  switch (kind) {
    case JointKind::fixed: return 0;
    case JointKind::revolute: return 1;
    case JointKind::spherical: return 3;
  }
  return 0;
}

Mat6X JointSpec::basis() const {
  Mat6X s = Mat6X::Zero(6, dof());
  if (kind == JointKind::revolute) s.col(0).head<3>() = axis.normalized();
  if (kind == JointKind::spherical) s.topRows<3>().setIdentity();
  return s;
}

void JointSpec::validate() const {
  if (kind == JointKind::revolute && !(axis.norm() > 0.0)) throw InvalidSpec("joint: zero revolute axis");
  if (stiffness < 0.0 || damping < 0.0) throw InvalidSpec("joint: stiffness and damping must be non-negative");
  if (hardening) hardening->validate();
}

Mat6 RigidBodySpec::cylinder_inertia(double mass, double radius, double length) {
  const double ixx = 0.5 * mass * radius * radius;
  const double iyy = mass * (3.0 * radius * radius + length * length) / 12.0;
  Vec6 d;
  d << ixx, iyy, iyy, mass, mass, mass;
  return d.asDiagonal();
}

void RigidBodySpec::validate() const {
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * inertia.cwiseAbs().maxCoeff())
    throw InvalidSpec("rigid body: inertia must be symmetric");
  Eigen::LLT<Mat6> llt(inertia);
  if (llt.info() != Eigen::Success) throw InvalidSpec("rigid body: inertia must be positive definite");
  if (!cm.is_valid() || !end.is_valid()) throw InvalidSpec("rigid body: invalid frame offset");
}

CapstanProfile capstan_profile(const std::vector<Vec3>& points, double friction, double tension) {
  const std::size_t count = points.size();
  if (count < 2) throw InvalidSpec("capstan: need at least two cable points");
  std::vector<Vec3> dir(count - 1);  // unit vector from point j to point j+1
  for (std::size_t j = 0; j + 1 < count; ++j) {
    const Vec3 seg = points[j + 1] - points[j];
    const double len = seg.norm();
    if (!(len > 1e-12)) throw GeometryError("capstan: coincident cable points");
    dir[j] = seg / len;
  }
  CapstanProfile out;
  out.multipliers.assign(count - 1, 1.0);
  out.wrap_angles.assign(count - 2, 0.0);
  out.forces.assign(count, Vec3::Zero());
  double cumulative = 0.0;
  for (std::size_t j = 1; j + 1 < count; ++j) {
    // v_L = -dir[j-1], v_R = dir[j]; phi = acos(-v_L . v_R).
    const double c = dir[j - 1].dot(dir[j]);
    if (std::abs(c) > 1.0 + 1e-9)
      std::cerr << "gvs: capstan wrap cosine " << c << " clamped\n";
    const double phi = std::acos(std::clamp(c, -1.0, 1.0));
    out.wrap_angles[j - 1] = phi;
    cumulative += phi;
    out.multipliers[j] = std::exp(-friction * cumulative);
  }
  for (std::size_t j = 1; j < count; ++j) {
    Vec3 f = -dir[j - 1] * out.multipliers[j - 1];
    if (j + 1 < count) f += dir[j] * out.multipliers[j];
    out.forces[j] = -tension * f;
  }
  return out;
}

std::vector<double> capstan_tension_profile(const std::vector<Vec3>& points, double friction) {
  return capstan_profile(points, friction, 0.0).multipliers;
}

}  // namespace gvs
