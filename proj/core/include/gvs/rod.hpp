#pragma once

#include <functional>
#include <vector>

#include "gvs/screw.hpp"

namespace gvs {

struct Material {
  double young_modulus = 1e6;   // Pa
  double poisson_ratio = 0.5;
  double density = 1000.0;      // kg/m^3
  double damping = 0.0;         // Pa s

  double shear_modulus() const { return young_modulus / (2.0 * (1.0 + poisson_ratio)); }
  void validate() const;
};

// Circular section whose radius varies linearly from base to tip.
struct CrossSection {
  double base_radius = 0.01;
  double tip_radius = 0.01;

  double radius(double x, double length) const {
    return base_radius + (tip_radius - base_radius) * x / length;
  }
  void validate() const;
};

// Diagonals of the inertia, stiffness and damping densities at one abscissa.
struct ScrewMatrices {
  Vec6 inertia;
  Vec6 stiffness;
  Vec6 damping;
};

struct SoftLinkSpec {
  double length = 0.25;
  Material material;
  CrossSection section;
  // Stress-free strain; unset means straight along the local x axis.
  std::function<Twist(double)> reference_strain;
  // Interior abscissae where the strain field may jump (piecewise bases).
  std::vector<double> section_breaks;
  int gauss_points = 5;  // per quadrature segment

  Twist reference(double x) const;
  ScrewMatrices screw_matrices(double x) const;
  void validate() const;
};

Twist straight_reference();

enum class CableRouting { internal, disk_guided };

// Tendon on a soft link. The hole offset follows a straight line from
// offset_base at x = 0 to offset_tip at x = path_length.
struct CableSpec {
  int link = 0;  // element index of the soft link
  Vec3 offset_base = Vec3::Zero();
  Vec3 offset_tip = Vec3::Zero();
  double path_length = 1.0;
  double x_begin = 0.0;
  double x_end = 1.0;
  CableRouting routing = CableRouting::internal;
  std::vector<double> disks;  // disk abscissae, ascending
  double friction = 0.0;

  Vec3 offset(double x) const { return offset_base + (offset_tip - offset_base) * (x / path_length); }
  Vec3 offset_rate() const { return (offset_tip - offset_base) / path_length; }
  bool active(double x) const { return x >= x_begin && x <= x_end; }
  void validate() const;
};

// Unit tangent of the cable path expressed in the local frame.
Vec3 cable_tangent(const CableSpec& cable, double x, const Twist& strain);

// Internal actuation wrench density for tension T (negative pulls).
Wrench cable_wrench_density(const CableSpec& cable, double x, const Twist& strain, double tension);

}  // namespace gvs
