#include "gvs/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gvs/error.hpp"
#include "gvs/quadrature.hpp"

namespace gvs {

namespace {

constexpr double kMergeTolerance = 1e-12;

void sort_unique(std::vector<double>& v, double scale) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > kMergeTolerance * scale) out.push_back(x);
  }
  v.swap(out);
}

bool is_soft(const Element& e) { return std::holds_alternative<SoftLinkSpec>(e); }

}  // namespace

const SoftLinkSpec& Robot::soft_link(int element) const {
  if (element < 0 || element >= static_cast<int>(elements.size()) || !is_soft(elements[element]))
    throw InvalidSpec("element " + std::to_string(element) + " is not a soft link");
  return std::get<SoftLinkSpec>(elements[element]);
}

void Robot::validate() const {
  if (elements.empty()) throw InvalidSpec("robot: no elements");
  if (!base.is_valid()) throw InvalidSpec("robot: invalid base pose");
  if (!gravity.allFinite()) throw InvalidSpec("robot: gravity must be finite");
  for (const auto& e : elements) {
    std::visit([](const auto& spec) { spec.validate(); }, e);
  }
  for (std::size_t k = 0; k < cables.size(); ++k) {
    const auto& c = cables[k];
    const auto& link = soft_link(c.link);
    c.validate();
    if (std::abs(c.path_length - link.length) > 1e-12 * link.length)
      throw InvalidSpec("cable " + std::to_string(k) + ": path length differs from its link length");
  }
  for (std::size_t k = 0; k < chain_cables.size(); ++k) {
    bool threaded = false;
    for (const auto& e : elements) {
      if (const auto* b = std::get_if<RigidBodySpec>(&e)) {
        for (const auto& o : b->outlets) threaded = threaded || o.cable == static_cast<int>(k);
      }
    }
    if (!threaded) throw InvalidSpec("chain cable " + std::to_string(k) + " passes through no body");
  }
  for (const auto& e : elements) {
    if (const auto* b = std::get_if<RigidBodySpec>(&e)) {
      for (const auto& o : b->outlets) {
        if (o.cable < 0 || o.cable >= static_cast<int>(chain_cables.size()))
          throw InvalidSpec("rigid body outlet references an unknown chain cable");
      }
    }
  }
  for (const auto& m : markers) {
    const auto& link = soft_link(m.link);
    if (m.x < 0.0 || m.x > link.length) throw InvalidSpec("marker abscissa outside its link");
  }
  for (const auto& l : loads) {
    const auto& link = soft_link(l.link);
    if (l.x < 0.0 || l.x > link.length) throw InvalidSpec("point load abscissa outside its link");
  }
}

Layout Layout::build(const Robot& robot) {
  robot.validate();
  Layout lay;
  const int ne = static_cast<int>(robot.elements.size());
  lay.element_start.assign(ne, 0);
  lay.element_end.assign(ne, 0);
  lay.soft_frames.assign(ne, {});
  lay.chain_passages.assign(robot.chain_cables.size(), {});
  int cur = 0;

  for (int e = 0; e < ne; ++e) {
    lay.element_start[e] = cur;
    const Element& el = robot.elements[e];
    if (const auto* link = std::get_if<SoftLinkSpec>(&el)) {
      const double L = link->length;
      std::vector<double> breaks{0.0, L};
      for (double b : link->section_breaks) breaks.push_back(b);
      std::vector<double> extras;
      for (const auto& c : robot.cables) {
        if (c.link != e) continue;
        if (c.routing == CableRouting::internal) {
          if (c.x_begin > 0.0) breaks.push_back(c.x_begin);
          if (c.x_end < L) breaks.push_back(c.x_end);
        } else {
          for (double d : c.disks) extras.push_back(d);
        }
      }
      for (const auto& m : robot.markers)
        if (m.link == e) extras.push_back(m.x);
      for (const auto& l : robot.loads)
        if (l.link == e) extras.push_back(l.x);
      sort_unique(breaks, L);

      std::vector<double> gauss_x, gauss_w;
      for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const auto rule = gauss_legendre(link->gauss_points, breaks[s], breaks[s + 1]);
        gauss_x.insert(gauss_x.end(), rule.nodes.begin(), rule.nodes.end());
        gauss_w.insert(gauss_w.end(), rule.weights.begin(), rule.weights.end());
      }
      std::vector<double> xs = breaks;
      xs.insert(xs.end(), gauss_x.begin(), gauss_x.end());
      xs.insert(xs.end(), extras.begin(), extras.end());
      sort_unique(xs, L);

      auto& frames = lay.soft_frames[e];
      frames.emplace_back(0.0, cur);
      for (std::size_t j = 1; j < xs.size(); ++j) frames.emplace_back(xs[j], lay.frame_count + static_cast<int>(j) - 1);

      // Strain points: both collocation points of every interval plus the
      // quadrature nodes, ordered along the link.
      struct Pending {
        double x;
        int interval;  // >= 0: collocation point of that interval
        int slot;      // 0/1 for collocation, gauss index otherwise
      };
      std::vector<Pending> pend;
      const double c = std::sqrt(3.0) / 6.0;
      for (std::size_t j = 1; j < xs.size(); ++j) {
        const double h = xs[j] - xs[j - 1];
        pend.push_back({xs[j - 1] + (0.5 - c) * h, static_cast<int>(j) - 1, 0});
        pend.push_back({xs[j - 1] + (0.5 + c) * h, static_cast<int>(j) - 1, 1});
      }
      for (std::size_t g = 0; g < gauss_x.size(); ++g) pend.push_back({gauss_x[g], -1, static_cast<int>(g)});
      std::stable_sort(pend.begin(), pend.end(), [](const Pending& a, const Pending& b) { return a.x < b.x; });

      const int nint = static_cast<int>(xs.size()) - 1;
      std::vector<int> z1(nint), z2(nint), gauss_sp(gauss_x.size());
      for (const auto& p : pend) {
        const int k = static_cast<int>(lay.strain_points.size());
        lay.strain_points.push_back({e, p.x});
        if (p.interval >= 0) {
          (p.slot == 0 ? z1 : z2)[p.interval] = k;
        } else {
          gauss_sp[p.slot] = k;
        }
      }
      for (int j = 0; j < nint; ++j) {
        Step s;
        s.kind = StepKind::magnus;
        s.element = e;
        s.parent = frames[j].second;
        s.frame = frames[j + 1].second;
        s.h = xs[j + 1] - xs[j];
        s.first = z1[j];
        s.second = z2[j];
        lay.steps.push_back(s);
      }
      lay.frame_count += nint;
      cur = frames.back().second;
      for (std::size_t g = 0; g < gauss_x.size(); ++g) {
        QuadraturePoint qp;
        qp.frame = lay.frame_at(e, gauss_x[g]);
        qp.strain = gauss_sp[g];
        qp.element = e;
        qp.x = gauss_x[g];
        qp.weight = gauss_w[g];
        qp.screw = link->screw_matrices(gauss_x[g]);
        lay.quadrature.push_back(qp);
      }
    } else if (const auto* joint = std::get_if<JointSpec>(&el)) {
      if (joint->dof() > 0) {
        const int k = static_cast<int>(lay.strain_points.size());
        lay.strain_points.push_back({e, 0.0});
        lay.joint_points.push_back(k);
        lay.joint_elements.push_back(e);
        Step s;
        s.kind = StepKind::joint;
        s.element = e;
        s.parent = cur;
        s.frame = lay.frame_count++;
        s.first = k;
        lay.steps.push_back(s);
        cur = s.frame;
      }
    } else {
      const auto& body = std::get<RigidBodySpec>(el);
      Step cm;
      cm.kind = StepKind::fixed;
      cm.element = e;
      cm.parent = cur;
      cm.frame = lay.frame_count++;
      cm.offset = body.cm;
      lay.steps.push_back(cm);
      lay.bodies.push_back({cm.frame, e});
      for (std::size_t o = 0; o < body.outlets.size(); ++o) {
        lay.chain_passages[body.outlets[o].cable].push_back({cm.frame, e, static_cast<int>(o)});
      }
      Step end = cm;
      end.frame = lay.frame_count++;
      end.offset = body.end;
      lay.steps.push_back(end);
      cur = end.frame;
    }
    lay.element_end[e] = cur;
  }
  lay.tip_frame = cur;

  for (const auto& m : robot.markers) lay.marker_frames.push_back(lay.frame_at(m.link, m.x));
  for (const auto& l : robot.loads) lay.load_frames.push_back(lay.frame_at(l.link, l.x));
  for (const auto& c : robot.cables) {
    std::vector<int> holes;
    if (c.routing == CableRouting::disk_guided) {
      holes.push_back(lay.element_start[c.link]);
      for (double d : c.disks) holes.push_back(lay.frame_at(c.link, d));
    }
    lay.cable_hole_frames.push_back(std::move(holes));
  }
  return lay;
}

int Layout::frame_at(int element, double x) const {
  if (element < 0 || element >= static_cast<int>(soft_frames.size()) || soft_frames[element].empty())
    throw InvalidSpec("frame_at: element is not a soft link");
  const auto& frames = soft_frames[element];
  const double scale = std::max(1.0, frames.back().first);
  const auto it = std::lower_bound(frames.begin(), frames.end(), x - 1e-11 * scale,
                                   [](const auto& a, double v) { return a.first < v; });
  if (it == frames.end() || std::abs(it->first - x) > 1e-11 * scale)
    throw InvalidSpec("frame_at: abscissa is not a computational point");
  return it->second;
}

std::vector<int> Layout::strain_points_of(int element) const {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(strain_points.size()); ++k)
    if (strain_points[k].element == element) out.push_back(k);
  return out;
}

std::vector<Twist> reference_strains(const Robot& robot, const Layout& layout) {
  std::vector<Twist> ref;
  ref.reserve(layout.strain_points.size());
  for (const auto& sp : layout.strain_points) {
    const auto* link = std::get_if<SoftLinkSpec>(&robot.elements[sp.element]);
    ref.push_back(link ? link->reference(sp.x) : Twist::Zero());
  }
  return ref;
}

StrainTable full_strain_table(const Robot& robot, const Layout& layout,
                              const std::vector<StrainBasisPtr>& soft_bases) {
  const int ne = static_cast<int>(robot.elements.size());
  std::vector<int> offset(ne, -1);
  std::vector<StrainBasisPtr> basis_of(ne);
  int n = 0;
  std::size_t next_basis = 0;
  for (int e = 0; e < ne; ++e) {
    if (const auto* link = std::get_if<SoftLinkSpec>(&robot.elements[e])) {
      if (next_basis >= soft_bases.size() || !soft_bases[next_basis])
        throw DimensionError("full_strain_table: one basis per soft link is required");
      basis_of[e] = soft_bases[next_basis++];
      if (std::abs(basis_of[e]->length() - link->length) > 1e-12 * link->length)
        throw DimensionError("full_strain_table: basis length differs from link length");
      offset[e] = n;
      n += basis_of[e]->dof_count();
    } else if (const auto* joint = std::get_if<JointSpec>(&robot.elements[e])) {
      offset[e] = n;
      n += joint->dof();
    }
  }
  if (next_basis != soft_bases.size()) throw DimensionError("full_strain_table: too many bases");
  if (n < 1) throw DimensionError("full_strain_table: robot has no degrees of freedom");
  StrainTable table;
  table.dof = n;
  table.reference = reference_strains(robot, layout);
  table.phi.reserve(layout.strain_points.size());
  for (const auto& sp : layout.strain_points) {
    Mat6X phi = Mat6X::Zero(6, n);
    if (basis_of[sp.element]) {
      const auto& b = *basis_of[sp.element];
      phi.middleCols(offset[sp.element], b.dof_count()) = b.evaluate(sp.x);
    } else {
      const auto& joint = std::get<JointSpec>(robot.elements[sp.element]);
      phi.middleCols(offset[sp.element], joint.dof()) = joint.basis();
    }
    table.phi.push_back(std::move(phi));
  }
  return table;
}

StrainTable concatenated_strain_table(const Robot& robot, const Layout& layout,
                                      const Eigen::MatrixXd& phi_o) {
  const auto p = static_cast<Eigen::Index>(layout.strain_points.size());
  if (phi_o.rows() != 6 * p) throw DimensionError("concatenated_strain_table: basis must have 6p rows");
  if (phi_o.cols() < 1) throw DimensionError("concatenated_strain_table: empty basis");
  StrainTable table;
  table.dof = static_cast<int>(phi_o.cols());
  table.reference = reference_strains(robot, layout);
  for (Eigen::Index k = 0; k < p; ++k) table.phi.push_back(phi_o.middleRows(6 * k, 6));
  return table;
}

Model::Model(Robot robot, Layout layout, StrainTable table)
    : robot_(std::move(robot)), layout_(std::move(layout)), table_(std::move(table)) {
  const int n = table_.dof;
  if (table_.phi.size() != layout_.strain_points.size() || table_.reference.size() != table_.phi.size())
    throw DimensionError("model: strain table does not match the layout");
  for (const auto& phi : table_.phi)
    if (phi.cols() != n) throw DimensionError("model: inconsistent basis width");
  stiffness_ = Eigen::MatrixXd::Zero(n, n);
  damping_ = Eigen::MatrixXd::Zero(n, n);
  for (const auto& qp : layout_.quadrature) {
    const Mat6X& phi = table_.phi[qp.strain];
    stiffness_.noalias() += qp.weight * phi.transpose() * qp.screw.stiffness.asDiagonal() * phi;
    damping_.noalias() += qp.weight * phi.transpose() * qp.screw.damping.asDiagonal() * phi;
  }
  for (std::size_t j = 0; j < layout_.joint_points.size(); ++j) {
    const auto& joint = std::get<JointSpec>(robot_.elements[layout_.joint_elements[j]]);
    const Mat6X s = joint.basis();
    const Eigen::MatrixXd proj = s.transpose() * table_.phi[layout_.joint_points[j]];
    stiffness_.noalias() += joint.linear_stiffness() * proj.transpose() * proj;
    damping_.noalias() += joint.damping * proj.transpose() * proj;
  }
  stiffness_ = 0.5 * (stiffness_ + stiffness_.transpose()).eval();
  damping_ = 0.5 * (damping_ + damping_.transpose()).eval();
}

Model Model::with_table(StrainTable table) const { return Model(robot_, layout_, std::move(table)); }

Model make_full_model(Robot robot, const std::vector<StrainBasisPtr>& soft_bases) {
  Layout layout = Layout::build(robot);
  StrainTable table = full_strain_table(robot, layout, soft_bases);
  return Model(std::move(robot), std::move(layout), std::move(table));
}

Model make_concatenated_model(Robot robot, const Eigen::MatrixXd& phi_o) {
  Layout layout = Layout::build(robot);
  StrainTable table = concatenated_strain_table(robot, layout, phi_o);
  return Model(std::move(robot), std::move(layout), std::move(table));
}

}  // namespace gvs
