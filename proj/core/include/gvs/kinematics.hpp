#pragma once

#include <vector>

#include <Eigen/Core>

#include "gvs/model.hpp"
#include "gvs/screw.hpp"

namespace gvs {

// Fourth-order Magnus increment from the strains at the two collocation points.
Twist magnus_step(const Twist& xi_z1, const Twist& xi_z2, double h);

enum class KinematicsLevel {
  pose,      // g and strains
  jacobian,  // + J
  velocity,  // + J, eta and the bias Jdot * qdot
  full,      // + Jdot
};

// Quantities at every frame of the layout. Jacobians are body-frame:
// eta = J qdot, g^-1 dg = hat(J dq).
struct KinematicState {
  std::vector<Pose> g;
  std::vector<Twist> strain;  // per strain point
  std::vector<Mat6X> J;
  std::vector<Mat6X> Jdot;
  std::vector<Twist> eta;
  std::vector<Twist> bias;  // Jdot * qdot
};

// qd may be empty for the pose and jacobian levels.
void evaluate_kinematics(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                         KinematicsLevel level, KinematicState& out);

std::vector<Pose> forward_kinematics(const Model& model, const Eigen::VectorXd& q);
std::vector<Mat6X> jacobian(const Model& model, const Eigen::VectorXd& q);
std::vector<Mat6X> jacobian_rate(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd);
std::vector<Twist> velocity(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd);

// Strains at every strain point: xi_k = phi_k q + reference_k.
std::vector<Twist> strains(const Model& model, const Eigen::VectorXd& q);

Vec3 tip_position(const Model& model, const Eigen::VectorXd& q);

}  // namespace gvs
