#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "gvs/basis.hpp"
#include "gvs/chain.hpp"
#include "gvs/rod.hpp"
#include "gvs/screw.hpp"

namespace gvs {

// Constant wrench at a centreline point of a soft link; moment and force are
// given in world axes when `world` is set, otherwise in the local frame.
struct PointLoad {
  int link = 0;
  double x = 0.0;
  Wrench wrench = Wrench::Zero();
  bool world = true;
};

// Position marker rigidly attached to a soft link cross-section.
struct MarkerSpec {
  int link = 0;
  double x = 0.0;
  Vec3 offset = Vec3::Zero();
};

using Element = std::variant<SoftLinkSpec, JointSpec, RigidBodySpec>;

// Serial chain of soft links, joints and rigid bodies starting at `base`.
struct Robot {
  Pose base;
  std::vector<Element> elements;
  std::vector<CableSpec> cables;
  std::vector<DiscreteCable> chain_cables;
  Vec3 gravity = Vec3::Zero();
  std::vector<PointLoad> loads;
  std::vector<MarkerSpec> markers;

  // Soft-link cables first, then chain cables.
  int actuator_count() const { return static_cast<int>(cables.size() + chain_cables.size()); }
  const SoftLinkSpec& soft_link(int element) const;
  void validate() const;
};

enum class StepKind { magnus, joint, fixed };

// One frame of the recursion derived from its parent frame.
struct Step {
  StepKind kind = StepKind::fixed;
  int element = -1;
  int parent = 0;
  int frame = 0;
  double h = 0.0;       // magnus: interval length
  int first = -1;       // magnus: strain point at Z1, joint: its strain point
  int second = -1;      // magnus: strain point at Z2
  Pose offset;          // fixed
};

struct StrainPoint {
  int element = 0;
  double x = 0.0;
};

struct QuadraturePoint {
  int frame = 0;
  int strain = 0;
  int element = 0;
  double x = 0.0;
  double weight = 0.0;
  ScrewMatrices screw;
};

struct LumpedBody {
  int frame = 0;  // CM frame
  int element = 0;
};

// Computational points of a robot: frames where poses and Jacobians live,
// strain points where the basis is sampled, quadrature and lumped masses.
struct Layout {
  std::vector<Step> steps;
  int frame_count = 1;  // frame 0 is the base
  std::vector<StrainPoint> strain_points;
  std::vector<QuadraturePoint> quadrature;
  std::vector<LumpedBody> bodies;
  std::vector<int> joint_points;       // strain point of each articulated joint
  std::vector<int> joint_elements;
  std::vector<int> element_start;      // frame where each element begins
  std::vector<int> element_end;        // frame where the next element attaches
  int tip_frame = 0;
  std::vector<int> marker_frames;
  std::vector<int> load_frames;
  // Disk-guided cables: frames of the cable holes (link start, then disks).
  std::vector<std::vector<int>> cable_hole_frames;
  // Chain cables: (CM frame, body element, outlet index) per threaded body.
  struct Passage {
    int frame;
    int element;
    int outlet;
  };
  std::vector<std::vector<Passage>> chain_passages;

  static Layout build(const Robot& robot);
  // Frame at abscissa x of a soft link (exact computational point).
  int frame_at(int element, double x) const;
  // Strain points of one element, in chain order.
  std::vector<int> strain_points_of(int element) const;

  std::vector<std::vector<std::pair<double, int>>> soft_frames;  // per element
};

// Strain basis sampled at every strain point: xi_k = phi[k] q + reference[k].
struct StrainTable {
  int dof = 0;
  std::vector<Mat6X> phi;
  std::vector<Twist> reference;
};

// One basis per soft link (element order); joints contribute their own columns.
StrainTable full_strain_table(const Robot& robot, const Layout& layout,
                              const std::vector<StrainBasisPtr>& soft_bases);
// Concatenated basis: rows [6k, 6k+6) of phi_o belong to strain point k.
StrainTable concatenated_strain_table(const Robot& robot, const Layout& layout,
                                      const Eigen::MatrixXd& phi_o);
std::vector<Twist> reference_strains(const Robot& robot, const Layout& layout);

class Model {
 public:
  Model(Robot robot, Layout layout, StrainTable table);

  const Robot& robot() const { return robot_; }
  const Layout& layout() const { return layout_; }
  const StrainTable& table() const { return table_; }
  int dof() const { return table_.dof; }
  int actuator_count() const { return robot_.actuator_count(); }

  // Constant linear stiffness and damping.
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  const Eigen::MatrixXd& damping() const { return damping_; }

  // Copy with a different basis on the same robot and layout.
  Model with_table(StrainTable table) const;

 private:
  Robot robot_;
  Layout layout_;
  StrainTable table_;
  Eigen::MatrixXd stiffness_;
  Eigen::MatrixXd damping_;
};

Model make_full_model(Robot robot, const std::vector<StrainBasisPtr>& soft_bases);
Model make_concatenated_model(Robot robot, const Eigen::MatrixXd& phi_o);

}  // namespace gvs
