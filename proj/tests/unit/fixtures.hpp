#pragma once

#include <array>
#include <memory>
#include <random>

#include <Eigen/Core>

#include "gvs/basis.hpp"
#include "gvs/model.hpp"
#include "gvs/screw.hpp"

namespace gvs::test {

inline Material silicone(double damping = 1e4) { return {1e6, 0.5, 1000.0, damping}; }

// Tapered 25 cm rod used by the single and three actuator manipulators.
inline SoftLinkSpec short_rod(int gauss_points = 5, double damping = 1e4) {
  SoftLinkSpec s;
  s.length = 0.25;
  s.material = silicone(damping);
  s.section = {0.0125, 0.005};
  s.gauss_points = gauss_points;
  return s;
}

inline CableSpec straight_cable(const Vec3& base, const Vec3& tip, double length = 0.25) {
  CableSpec c;
  c.link = 0;
  c.offset_base = base;
  c.offset_tip = tip;
  c.path_length = length;
  c.x_begin = 0.0;
  c.x_end = length;
  return c;
}

// Rod with the single converging cable of the planar scenario.
inline Robot single_actuator_robot(int gauss_points = 5, double damping = 1e4) {
  Robot r;
  r.elements.push_back(short_rod(gauss_points, damping));
  r.cables.push_back(straight_cable({0, 0, 0.01}, {0, 0, 0.003}));
  return r;
}

inline StrainBasisPtr legendre(double length, std::array<int, 6> orders) {
  return std::make_shared<LegendreMonomialBasis>(length, orders);
}

inline Model rod_model(Robot robot, std::array<int, 6> orders) {
  const double L = std::get<SoftLinkSpec>(robot.elements.front()).length;
  return make_full_model(std::move(robot), {legendre(L, orders)});
}

// One constant column along a single strain row.
class ConstantRowBasis final : public StrainBasis {
 public:
  ConstantRowBasis(double length, int row) : length_(length), row_(row) {}
  Mat6X evaluate(double) const override {
    Mat6X phi = Mat6X::Zero(6, 1);
    phi(row_, 0) = 1.0;
    return phi;
  }
  int dof_count() const override { return 1; }
  double length() const override { return length_; }

 private:
  double length_;
  int row_;
};

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Vec6 random_twist(std::mt19937_64& rng, double angular_norm_max, double linear_scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 w(u(rng), u(rng), u(rng));
  w = w.normalized() * (0.5 * (u(rng) + 1.0) * angular_norm_max);
  Vec3 v(u(rng), u(rng), u(rng));
  return make_twist(w, linear_scale * v);
}

inline Pose random_pose(std::mt19937_64& rng) { return exp_se3(random_twist(rng, 3.0, 2.0)); }

}  // namespace gvs::test
