#pragma once

#include <optional>
#include <vector>

#include "gvs/screw.hpp"

namespace gvs {

// tau(theta) = k0 theta + k_wall (theta / theta_limit)^p with p odd.
struct HardeningStiffness {
  double k0 = 1.0;
  double theta_limit = 0.3;
  double k_wall = 1.0;
  int exponent = 7;

  double torque(double theta) const { return k0 * theta + wall_torque(theta); }
  double wall_torque(double theta) const;
  void validate() const;
};

enum class JointKind { fixed, revolute, spherical };

// Rotational joint; its twist over a unit interval is basis() * theta.
struct JointSpec {
  JointKind kind = JointKind::spherical;
  Vec3 axis = Vec3::UnitZ();  // revolute only
  double stiffness = 0.0;     // linear k0, N m / rad
  std::optional<HardeningStiffness> hardening;
  double damping = 0.0;

  int dof() const;
  Mat6X basis() const;
  double linear_stiffness() const { return hardening ? hardening->k0 : stiffness; }
  void validate() const;
};

// Cable passage through a rigid body: hole points in the CM frame on the
// proximal (left) and distal (right) sides.
struct CableOutlet {
  int cable = 0;
  Vec3 left = Vec3::Zero();
  Vec3 right = Vec3::Zero();
};

struct RigidBodySpec {
  Mat6 inertia = Mat6::Identity();  // screw inertia about the CM frame
  Pose cm;                          // CM frame relative to the body's start frame
  Pose end;                         // attachment of the next element, relative to the start frame
  std::vector<CableOutlet> outlets;

  static Mat6 cylinder_inertia(double mass, double radius, double length);
  void validate() const;
};

// Cable threaded through successive rigid bodies; anchored in the base frame
// and terminated on the last body that carries an outlet for it.
struct DiscreteCable {
  Vec3 anchor = Vec3::Zero();
};

// Forces (world frame) at a polyline of cable holes for tension T (negative
// pulls). points[0] is the fixed anchor; every other point receives the
// pull of its neighbours, the last one only from its predecessor. With
// friction each interior hole attenuates the distal segment by exp(-mu phi).
struct CapstanProfile {
  std::vector<double> wrap_angles;   // per interior hole
  std::vector<double> multipliers;   // per segment, segment j joins points j and j+1
  std::vector<Vec3> forces;          // per point (entry 0 unused, zero)
};

CapstanProfile capstan_profile(const std::vector<Vec3>& points, double friction, double tension);

// Multipliers only: e^{-mu sum phi} for each segment.
std::vector<double> capstan_tension_profile(const std::vector<Vec3>& points, double friction);

}  // namespace gvs
