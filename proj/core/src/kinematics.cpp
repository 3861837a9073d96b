#include "gvs/kinematics.hpp"

#include <cmath>

#include "gvs/error.hpp"

namespace gvs {

namespace {

const double kSqrt3 = std::sqrt(3.0);

void check_sizes(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd* qd) {
  if (q.size() != model.dof())
    throw DimensionError("kinematics: q has " + std::to_string(q.size()) + " entries, basis has " +
                         std::to_string(model.dof()));
  if (qd && qd->size() != model.dof()) throw DimensionError("kinematics: qdot size mismatch");
}

}  // namespace

Twist magnus_step(const Twist& xi_z1, const Twist& xi_z2, double h) {
  return 0.5 * h * (xi_z1 + xi_z2) + (kSqrt3 * h * h / 12.0) * ad_apply(xi_z1, xi_z2);
}

void evaluate_kinematics(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                         KinematicsLevel level, KinematicState& out) {
  const bool want_j = level != KinematicsLevel::pose;
  const bool want_v = level == KinematicsLevel::velocity || level == KinematicsLevel::full;
  const bool want_jd = level == KinematicsLevel::full;
  check_sizes(model, q, want_v ? &qd : nullptr);

  const Layout& lay = model.layout();
  const StrainTable& tab = model.table();
  const int n = model.dof();
  const auto nf = static_cast<std::size_t>(lay.frame_count);

  out.g.resize(nf);
  out.g[0] = model.robot().base;
  const std::size_t np = tab.phi.size();
  out.strain.resize(np);
  for (std::size_t k = 0; k < np; ++k) out.strain[k].noalias() = tab.phi[k] * q + tab.reference[k];

  std::vector<Twist> rate;  // strain rates
  if (want_v) {
    rate.resize(np);
    for (std::size_t k = 0; k < np; ++k) rate[k].noalias() = tab.phi[k] * qd;
  }
  if (want_j) {
    out.J.resize(nf);
    out.J[0] = Mat6X::Zero(6, n);
  } else {
    out.J.clear();
  }
  if (want_v) {
    out.eta.assign(nf, Twist::Zero());
    out.bias.assign(nf, Twist::Zero());
  } else {
    out.eta.clear();
    out.bias.clear();
  }
  if (want_jd) {
    out.Jdot.resize(nf);
    out.Jdot[0] = Mat6X::Zero(6, n);
  } else {
    out.Jdot.clear();
  }

  Mat6X omega_q(6, n), omega_qd(6, n);
  for (const Step& s : lay.steps) {
    const auto p = static_cast<std::size_t>(s.parent);
    const auto f = static_cast<std::size_t>(s.frame);
    if (s.kind == StepKind::fixed) {
      out.g[f] = out.g[p] * s.offset;
      if (!want_j) continue;
      const Mat6 A = adjoint_inverse(s.offset);
      out.J[f].noalias() = A * out.J[p];
      if (want_v) {
        out.eta[f].noalias() = A * out.eta[p];
        out.bias[f].noalias() = A * out.bias[p];
      }
      if (want_jd) out.Jdot[f].noalias() = A * out.Jdot[p];
      continue;
    }

    Twist omega;
    double c = 0.0;  // bracket coefficient
    const Twist* xi1 = nullptr;
    const Twist* xi2 = nullptr;
    if (s.kind == StepKind::magnus) {
      xi1 = &out.strain[s.first];
      xi2 = &out.strain[s.second];
      c = kSqrt3 * s.h * s.h / 12.0;
      omega = 0.5 * s.h * (*xi1 + *xi2) + c * ad_apply(*xi1, *xi2);
    } else {
      omega = out.strain[s.first];
    }
    const Pose E = exp_se3(omega);
    out.g[f] = out.g[p] * E;
    if (!want_j) continue;

    const Mat6X& phi1 = tab.phi[s.first];
    if (s.kind == StepKind::magnus) {
      const Mat6X& phi2 = tab.phi[s.second];
      omega_q.noalias() = 0.5 * s.h * (phi1 + phi2);
      omega_q.noalias() += c * ad(*xi1) * phi2;
      omega_q.noalias() -= c * ad(*xi2) * phi1;
    } else {
      omega_q = phi1;
    }
    const Mat6 A = adjoint_inverse(E);
    const Mat6 T = dexp(omega);
    out.J[f].noalias() = A * out.J[p];
    out.J[f].noalias() += T * omega_q;
    if (!want_v) continue;

    const Twist omega_dot = omega_q * qd;
    const Twist u = T * omega_dot;
    const Twist a_eta = A * out.eta[p];
    out.eta[f] = a_eta + u;
    const Mat6 Tdot = dexp_rate(omega, omega_dot);
    Twist b = A * out.bias[p] - ad_apply(u, a_eta) + Tdot * omega_dot;
    if (s.kind == StepKind::magnus) {
      const Twist& r1 = rate[s.first];
      const Twist& r2 = rate[s.second];
      b += T * (2.0 * c * ad_apply(r1, r2));
      if (want_jd) {
        omega_qd.noalias() = c * ad(r1) * tab.phi[s.second];
        omega_qd.noalias() -= c * ad(r2) * phi1;
      }
    } else if (want_jd) {
      omega_qd.setZero();
    }
    out.bias[f] = b;
    if (want_jd) {
      const Mat6X AJ = A * out.J[p];
      out.Jdot[f].noalias() = A * out.Jdot[p];
      out.Jdot[f].noalias() -= ad(u) * AJ;
      out.Jdot[f].noalias() += Tdot * omega_q;
      out.Jdot[f].noalias() += T * omega_qd;
    }
  }
}

std::vector<Pose> forward_kinematics(const Model& model, const Eigen::VectorXd& q) {
  KinematicState st;
  evaluate_kinematics(model, q, Eigen::VectorXd(), KinematicsLevel::pose, st);
  return st.g;
}

std::vector<Mat6X> jacobian(const Model& model, const Eigen::VectorXd& q) {
  KinematicState st;
  evaluate_kinematics(model, q, Eigen::VectorXd(), KinematicsLevel::jacobian, st);
  return st.J;
}

std::vector<Mat6X> jacobian_rate(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
  KinematicState st;
  evaluate_kinematics(model, q, qd, KinematicsLevel::full, st);
  return st.Jdot;
}

std::vector<Twist> velocity(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
  KinematicState st;
  evaluate_kinematics(model, q, qd, KinematicsLevel::velocity, st);
  return st.eta;
}

std::vector<Twist> strains(const Model& model, const Eigen::VectorXd& q) {
  check_sizes(model, q, nullptr);
  const auto& tab = model.table();
  std::vector<Twist> out(tab.phi.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k].noalias() = tab.phi[k] * q + tab.reference[k];
  return out;
}

Vec3 tip_position(const Model& model, const Eigen::VectorXd& q) {
  return forward_kinematics(model, q)[model.layout().tip_frame].r;
}

}  // namespace gvs
