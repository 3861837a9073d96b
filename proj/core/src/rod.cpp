#include "gvs/rod.hpp"

#include <cmath>
#include <numbers>

#include "gvs/error.hpp"

namespace gvs {

void Material::validate() const {
  if (!(young_modulus > 0.0)) throw InvalidSpec("material: Young's modulus must be positive");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5 + 1e-12))
    throw InvalidSpec("material: Poisson ratio must lie in [0, 0.5]");
  if (!(density > 0.0)) throw InvalidSpec("material: density must be positive");
  if (!(damping >= 0.0)) throw InvalidSpec("material: damping must be non-negative");
}

void CrossSection::validate() const {
  if (!(base_radius > 0.0) || !(tip_radius > 0.0))
    throw InvalidSpec("cross-section: radii must be positive");
}

Twist straight_reference() { return (Twist() << 0, 0, 0, 1, 0, 0).finished(); }

Twist SoftLinkSpec::reference(double x) const {
  return reference_strain ? reference_strain(x) : straight_reference();
}

ScrewMatrices SoftLinkSpec::screw_matrices(double x) const {
  const double r = section.radius(x, length);
  const double r2 = r * r;
  const double area = std::numbers::pi * r2;
  const double bend = 0.25 * std::numbers::pi * r2 * r2;
  const double polar = 2.0 * bend;
  const Vec6 geometry = (Vec6() << polar, bend, bend, area, area, area).finished();
  const double E = material.young_modulus, G = material.shear_modulus();
  ScrewMatrices m;
  m.inertia = material.density * geometry;
  m.stiffness << G * polar, E * bend, E * bend, E * area, G * area, G * area;
  m.damping = material.damping * geometry;
  return m;
}

void SoftLinkSpec::validate() const {
  if (!(length > 0.0)) throw InvalidSpec("soft link: length must be positive");
  material.validate();
  section.validate();
  if (gauss_points < 1) throw InvalidSpec("soft link: gauss_points must be >= 1");
  double prev = 0.0;
  for (double b : section_breaks) {
    if (!(b > prev && b < length)) throw InvalidSpec("soft link: section breaks must increase inside (0, L)");
    prev = b;
  }
  for (double x : {0.0, 0.5 * length, length}) {
    if (!(reference(x)(3) > 0.0))
      throw InvalidSpec("soft link: reference strain must stretch along local x");
  }
}

void CableSpec::validate() const {
  if (!(x_begin < x_end)) throw InvalidSpec("cable: active domain must satisfy begin < end");
  if (!(path_length > 0.0)) throw InvalidSpec("cable: path length must be positive");
  if (x_begin < -1e-12 || x_end > path_length + 1e-12) throw InvalidSpec("cable: domain outside the link");
  if (offset_base.x() != 0.0 || offset_tip.x() != 0.0)
    throw InvalidSpec("cable: offsets must lie in the cross-section plane");
  if (friction < 0.0) throw InvalidSpec("cable: friction must be non-negative");
  if (routing == CableRouting::disk_guided) {
    if (disks.empty()) throw InvalidSpec("cable: disk-guided routing needs at least one disk");
    double prev = 0.0;
    for (double d : disks) {
      if (!(d > prev && d <= path_length + 1e-12)) throw InvalidSpec("cable: disks must increase inside (0, L]");
      prev = d;
    }
  }
}

Vec3 cable_tangent(const CableSpec& cable, double x, const Twist& strain) {
  const Vec3 t = linear(strain) + angular(strain).cross(cable.offset(x)) + cable.offset_rate();
  const double n = t.norm();
  if (!(n > 1e-14)) throw GeometryError("cable_tangent: degenerate cable tangent");
  return t / n;
}

Wrench cable_wrench_density(const CableSpec& cable, double x, const Twist& strain, double tension) {
  if (!cable.active(x)) return Wrench::Zero();
  const Vec3 t = cable_tangent(cable, x, strain);
  return make_twist(cable.offset(x).cross(t), t) * tension;
}

}  // namespace gvs
