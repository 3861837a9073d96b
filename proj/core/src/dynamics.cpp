#include "gvs/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "gvs/error.hpp"

namespace gvs {

namespace {

struct FrameWrench {
  int frame;
  Wrench wrench;  // local frame
};

// Wrench about a frame origin from a point force; both in local axes.
Wrench point_wrench(const Vec3& point, const Vec3& force) { return make_twist(point.cross(force), force); }

// Unit-tension wrenches of one disk-guided cable.
std::vector<FrameWrench> disk_cable_loads(const Model& model, std::size_t cable, const std::vector<Pose>& g,
                                          double tension) {
  const auto& c = model.robot().cables[cable];
  const auto& frames = model.layout().cable_hole_frames[cable];
  std::vector<Vec3> holes;
  std::vector<Vec3> local;
  holes.reserve(frames.size());
  local.push_back(c.offset(0.0));
  holes.push_back(g[frames[0]].apply(local.back()));
  for (std::size_t d = 0; d < c.disks.size(); ++d) {
    local.push_back(c.offset(c.disks[d]));
    holes.push_back(g[frames[d + 1]].apply(local.back()));
  }
  const auto profile = capstan_profile(holes, c.friction, tension);
  std::vector<FrameWrench> out;
  for (std::size_t j = 1; j < holes.size(); ++j) {
    const Pose& gd = g[frames[j]];
    out.push_back({frames[j], point_wrench(local[j], gd.R.transpose() * profile.forces[j])});
  }
  return out;
}

// Wrenches about the CM frames of the bodies a chain cable passes through.
std::vector<FrameWrench> chain_cable_loads(const Model& model, std::size_t cable, const std::vector<Pose>& g,
                                           double tension) {
  const auto& robot = model.robot();
  const auto& passages = model.layout().chain_passages[cable];
  std::vector<FrameWrench> out;
  Vec3 previous = robot.base.apply(robot.chain_cables[cable].anchor);
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const auto& pass = passages[i];
    const auto& body = std::get<RigidBodySpec>(robot.elements[pass.element]);
    const auto& outlet = body.outlets[pass.outlet];
    const Pose& gc = g[pass.frame];
    const Vec3 left = gc.apply(outlet.left);
    Vec3 seg = previous - left;
    double len = seg.norm();
    if (!(len > 1e-12)) throw GeometryError("chain cable: coincident outlet points");
    Wrench w = point_wrench(outlet.left, gc.R.transpose() * (-tension * seg / len));
    const Vec3 right = gc.apply(outlet.right);
    if (i + 1 < passages.size()) {
      const auto& next_pass = passages[i + 1];
      const auto& next_body = std::get<RigidBodySpec>(robot.elements[next_pass.element]);
      const Vec3 next_left = g[next_pass.frame].apply(next_body.outlets[next_pass.outlet].left);
      seg = next_left - right;
      len = seg.norm();
      if (!(len > 1e-12)) throw GeometryError("chain cable: coincident outlet points");
      w += point_wrench(outlet.right, gc.R.transpose() * (-tension * seg / len));
    }
    out.push_back({pass.frame, w});
    previous = right;
  }
  return out;
}

bool needs_frames(const Model& model) {
  const auto& r = model.robot();
  if (r.gravity.squaredNorm() > 0.0 || !r.loads.empty() || !r.chain_cables.empty()) return true;
  for (const auto& c : r.cables)
    if (c.routing == CableRouting::disk_guided) return true;
  return false;
}

}  // namespace

Eigen::MatrixXd mass_matrix(const Model& model, const KinematicState& st) {
  const int n = model.dof();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd scaled(6, n);
  for (const auto& qp : model.layout().quadrature) {
    const Vec6 s = (qp.weight * qp.screw.inertia).cwiseSqrt();
    scaled.noalias() = s.asDiagonal() * st.J[qp.frame];
    M.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  }
  M = M.selfadjointView<Eigen::Lower>();
  for (const auto& b : model.layout().bodies) {
    const auto& body = std::get<RigidBodySpec>(model.robot().elements[b.element]);
    const Mat6X& J = st.J[b.frame];
    M.noalias() += J.transpose() * (body.inertia * J);
  }
  return M;
}

Eigen::VectorXd coriolis_force(const Model& model, const KinematicState& st) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.dof());
  auto term = [](const Mat6& inertia, const Twist& eta, const Twist& bias) {
    const Wrench h = inertia * eta;
    // -ad(eta)^T h + inertia * bias
    const Vec3 w = angular(eta), v = linear(eta);
    const Vec3 m = angular(h), f = linear(h);
    return Wrench(make_twist(w.cross(m) + v.cross(f), w.cross(f)) + inertia * bias);
  };
  for (const auto& qp : model.layout().quadrature) {
    const Mat6 inertia = (qp.weight * qp.screw.inertia).asDiagonal();
    out.noalias() += st.J[qp.frame].transpose() * term(inertia, st.eta[qp.frame], st.bias[qp.frame]);
  }
  for (const auto& b : model.layout().bodies) {
    const auto& body = std::get<RigidBodySpec>(model.robot().elements[b.element]);
    out.noalias() += st.J[b.frame].transpose() * term(body.inertia, st.eta[b.frame], st.bias[b.frame]);
  }
  return out;
}

Eigen::MatrixXd actuation_matrix(const Model& model, const KinematicState& st) {
  const auto& robot = model.robot();
  const auto& lay = model.layout();
  const auto& tab = model.table();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(model.dof(), robot.actuator_count());
  for (std::size_t i = 0; i < robot.cables.size(); ++i) {
    const auto& c = robot.cables[i];
    if (c.routing == CableRouting::internal) {
      for (const auto& qp : lay.quadrature) {
        if (qp.element != c.link || !c.active(qp.x)) continue;
        const Wrench w = cable_wrench_density(c, qp.x, st.strain[qp.strain], qp.weight);
        B.col(static_cast<Eigen::Index>(i)).noalias() += tab.phi[qp.strain].transpose() * w;
      }
    } else {
      for (const auto& fw : disk_cable_loads(model, i, st.g, 1.0))
        B.col(static_cast<Eigen::Index>(i)).noalias() += st.J[fw.frame].transpose() * fw.wrench;
    }
  }
  for (std::size_t k = 0; k < robot.chain_cables.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(robot.cables.size() + k);
    for (const auto& fw : chain_cable_loads(model, k, st.g, 1.0))
      B.col(col).noalias() += st.J[fw.frame].transpose() * fw.wrench;
  }
  return B;
}

Eigen::VectorXd external_force(const Model& model, const KinematicState& st) {
  const auto& robot = model.robot();
  const auto& lay = model.layout();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(model.dof());
  if (robot.gravity.squaredNorm() > 0.0) {
    for (const auto& qp : lay.quadrature) {
      const Vec3 a = st.g[qp.frame].R.transpose() * robot.gravity;
      const Wrench w = make_twist(Vec3::Zero(), qp.weight * qp.screw.inertia.tail<3>().cwiseProduct(a));
      F.noalias() += st.J[qp.frame].transpose() * w;
    }
    for (const auto& b : lay.bodies) {
      const auto& body = std::get<RigidBodySpec>(robot.elements[b.element]);
      const Vec3 a = st.g[b.frame].R.transpose() * robot.gravity;
      F.noalias() += st.J[b.frame].transpose() * (body.inertia * make_twist(Vec3::Zero(), a));
    }
  }
  for (std::size_t i = 0; i < robot.loads.size(); ++i) {
    const auto& load = robot.loads[i];
    const int f = lay.load_frames[i];
    Wrench w = load.wrench;
    if (load.world) {
      const Mat3 Rt = st.g[f].R.transpose();
      w = make_twist(Rt * angular(load.wrench), Rt * linear(load.wrench));
    }
    F.noalias() += st.J[f].transpose() * w;
  }
  return F;
}

Eigen::VectorXd joint_wall_force(const Model& model, const KinematicState& st) {
  const auto& lay = model.layout();
  Eigen::VectorXd N = Eigen::VectorXd::Zero(model.dof());
  for (std::size_t j = 0; j < lay.joint_points.size(); ++j) {
    const auto& joint = std::get<JointSpec>(model.robot().elements[lay.joint_elements[j]]);
    if (!joint.hardening) continue;
    const int k = lay.joint_points[j];
    const Mat6X s = joint.basis();
    const Eigen::VectorXd theta = s.transpose() * st.strain[k];
    Eigen::VectorXd torque = Eigen::VectorXd::Zero(theta.size());
    if (joint.kind == JointKind::revolute) {
      torque(0) = joint.hardening->wall_torque(theta(0));
    } else {
      const double mag = theta.norm();
      if (mag > 0.0) torque = joint.hardening->wall_torque(mag) / mag * theta;
    }
    N.noalias() += model.table().phi[k].transpose() * (s * torque);
  }
  return N;
}

std::vector<Wrench> chain_cable_wrenches(const Model& model, const std::vector<Pose>& g,
                                         const Eigen::VectorXd& tensions) {
  const auto& robot = model.robot();
  const auto& lay = model.layout();
  if (tensions.size() != robot.actuator_count()) throw DimensionError("chain_cable_wrenches: tension size");
  std::vector<Wrench> out(lay.bodies.size(), Wrench::Zero());
  for (std::size_t k = 0; k < robot.chain_cables.size(); ++k) {
    const double t = tensions(static_cast<Eigen::Index>(robot.cables.size() + k));
    for (const auto& fw : chain_cable_loads(model, k, g, t)) {
      for (std::size_t b = 0; b < lay.bodies.size(); ++b)
        if (lay.bodies[b].frame == fw.frame) out[b] += fw.wrench;
    }
  }
  return out;
}

std::vector<std::vector<Wrench>> disk_wrenches(const Model& model, const std::vector<Pose>& g,
                                               const Eigen::VectorXd& tensions) {
  const auto& robot = model.robot();
  if (tensions.size() != robot.actuator_count()) throw DimensionError("disk_wrenches: tension size");
  std::vector<std::vector<Wrench>> out(robot.cables.size());
  for (std::size_t i = 0; i < robot.cables.size(); ++i) {
    if (robot.cables[i].routing != CableRouting::disk_guided) continue;
    for (const auto& fw : disk_cable_loads(model, i, g, tensions(static_cast<Eigen::Index>(i))))
      out[i].push_back(fw.wrench);
  }
  return out;
}

GeneralizedCoefficients assemble(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
  KinematicState st;
  evaluate_kinematics(model, q, qd, KinematicsLevel::full, st);
  GeneralizedCoefficients c;
  c.M = mass_matrix(model, st);
  Eigen::LLT<Eigen::MatrixXd> llt(c.M);
  if (llt.info() != Eigen::Success) throw SolverError("assemble: mass matrix is not positive definite");
  const int n = model.dof();
  c.C = Eigen::MatrixXd::Zero(n, n);
  auto add_c = [&](const Mat6& inertia, const Mat6X& J, const Mat6X& Jdot, const Twist& eta) {
    c.C.noalias() += J.transpose() * (-ad_star(eta) * inertia * J + inertia * Jdot);
  };
  for (const auto& qp : model.layout().quadrature) {
    const Mat6 inertia = (qp.weight * qp.screw.inertia).asDiagonal();
    add_c(inertia, st.J[qp.frame], st.Jdot[qp.frame], st.eta[qp.frame]);
  }
  for (const auto& b : model.layout().bodies) {
    const auto& body = std::get<RigidBodySpec>(model.robot().elements[b.element]);
    add_c(body.inertia, st.J[b.frame], st.Jdot[b.frame], st.eta[b.frame]);
  }
  c.D = model.damping();
  c.K = model.stiffness();
  c.B = actuation_matrix(model, st);
  c.F = external_force(model, st);
  c.N = joint_wall_force(model, st);
  return c;
}

namespace {

struct ResidualParts {
  Eigen::VectorXd r;
  double scale = 0.0;
};

ResidualParts residual_parts(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& tensions,
                             KinematicState& st, bool frames) {
  evaluate_kinematics(model, q, Eigen::VectorXd(), frames ? KinematicsLevel::jacobian : KinematicsLevel::pose, st);
  const Eigen::VectorXd kq = model.stiffness() * q;
  const Eigen::VectorXd n = joint_wall_force(model, st);
  const Eigen::MatrixXd b = actuation_matrix(model, st);
  ResidualParts out;
  out.r = kq + n - b * tensions;
  // Per-cable magnitudes, so balanced tension sets do not collapse the scale.
  const double bt = (b.cwiseAbs() * tensions.cwiseAbs()).lpNorm<Eigen::Infinity>();
  out.scale = std::max({kq.lpNorm<Eigen::Infinity>(), n.lpNorm<Eigen::Infinity>(), bt});
  if (frames) {
    const Eigen::VectorXd f = external_force(model, st);
    out.r -= f;
    out.scale = std::max(out.scale, f.lpNorm<Eigen::Infinity>());
  }
  return out;
}

}  // namespace

Eigen::VectorXd static_residual(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& tensions) {
  if (tensions.size() != model.actuator_count()) throw DimensionError("static_residual: tension size");
  KinematicState st;
  return residual_parts(model, q, tensions, st, needs_frames(model)).r;
}

StaticsResult solve_statics(const Model& model, const Eigen::VectorXd& tensions, const Eigen::VectorXd& initial,
                            const StaticsOptions& options) {
  const int n = model.dof();
  if (tensions.size() != model.actuator_count()) throw DimensionError("solve_statics: tension size");
  Eigen::VectorXd q = initial.size() == 0 ? Eigen::VectorXd::Zero(n) : initial;
  if (q.size() != n) throw DimensionError("solve_statics: initial guess size");
  const bool frames = needs_frames(model);
  KinematicState st;
  auto parts = residual_parts(model, q, tensions, st, frames);
  auto converged = [&](const ResidualParts& p) {
    return p.r.lpNorm<Eigen::Infinity>() <= options.tolerance * std::max(p.scale, 1e-14);
  };
  Eigen::MatrixXd jac(n, n);
  StaticsResult res;
  for (int it = 0; it < options.max_iterations; ++it) {
    if (converged(parts)) {
      res.q = q;
      res.residual = parts.r.lpNorm<Eigen::Infinity>();
      res.iterations = it;
      return res;
    }
    for (int i = 0; i < n; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(q(i)));
      Eigen::VectorXd qp = q, qm = q;
      qp(i) += h;
      qm(i) -= h;
      jac.col(i) = (residual_parts(model, qp, tensions, st, frames).r -
                    residual_parts(model, qm, tensions, st, frames).r) / (2.0 * h);
    }
    const Eigen::VectorXd dq = jac.partialPivLu().solve(-parts.r);
    if (!dq.allFinite()) throw SolverError("solve_statics: singular residual Jacobian", parts.r.norm());
    const double r0 = parts.r.norm();
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, alpha *= 0.5) {
      ResidualParts trial;
      try {
        trial = residual_parts(model, q + alpha * dq, tensions, st, frames);
      } catch (const GeometryError&) {
        continue;
      }
      if (trial.r.allFinite() && trial.r.norm() < r0) {
        q += alpha * dq;
        parts = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent left: accept if already at the precision floor.
      if (parts.r.lpNorm<Eigen::Infinity>() <= 1e3 * options.tolerance * std::max(parts.scale, 1e-14)) break;
      throw SolverError("solve_statics: line search failed", parts.r.lpNorm<Eigen::Infinity>());
    }
    res.iterations = it + 1;
  }
  if (!converged(parts) &&
      parts.r.lpNorm<Eigen::Infinity>() > 1e3 * options.tolerance * std::max(parts.scale, 1e-14)) {
    throw SolverError("solve_statics: no convergence after " + std::to_string(options.max_iterations) +
                          " iterations",
                      parts.r.lpNorm<Eigen::Infinity>());
  }
  res.q = q;
  res.residual = parts.r.lpNorm<Eigen::Infinity>();
  return res;
}

DynamicsEvaluator::DynamicsEvaluator(const Model& model) : model_(model) {}

const Eigen::VectorXd& DynamicsEvaluator::acceleration(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                                                       const Eigen::VectorXd& tensions) {
  evaluate_kinematics(model_, q, qd, KinematicsLevel::velocity, st_);
  M_ = mass_matrix(model_, st_);
  rhs_.noalias() = actuation_matrix(model_, st_) * tensions;
  rhs_ += external_force(model_, st_);
  rhs_ -= coriolis_force(model_, st_);
  rhs_.noalias() -= model_.damping() * qd;
  rhs_.noalias() -= model_.stiffness() * q;
  rhs_ -= joint_wall_force(model_, st_);
  llt_.compute(M_);
  if (llt_.info() != Eigen::Success) throw SolverError("dynamics: mass matrix is not positive definite");
  acc_ = llt_.solve(rhs_);
  return acc_;
}

namespace {

struct State {
  Eigen::VectorXd q, qd;
};

void check_finite(const State& y, double t) {
  if (!y.q.allFinite() || !y.qd.allFinite()) {
    std::ostringstream os;
    os << "dynamics: non-finite state at t = " << t;
    throw SolverError(os.str(), -1.0, t);
  }
}

}  // namespace

Trajectory solve_dynamics(const Model& model, const ActuationSignal& signal, double horizon,
                          const DynamicsOptions& options, const Eigen::VectorXd& q0, const Eigen::VectorXd& qd0) {
  const int n = model.dof();
  if (!(options.dt > 0.0)) throw InvalidSpec("solve_dynamics: dt must be positive");
  if (!(options.sample_rate > 0.0)) throw InvalidSpec("solve_dynamics: sample rate must be positive");
  if (!(horizon >= 0.0)) throw InvalidSpec("solve_dynamics: negative horizon");
  if (signal.channels() != model.actuator_count())
    throw DimensionError("solve_dynamics: signal has " + std::to_string(signal.channels()) +
                         " channels, robot has " + std::to_string(model.actuator_count()) + " actuators");
  State y{q0.size() ? q0 : Eigen::VectorXd::Zero(n), qd0.size() ? qd0 : Eigen::VectorXd::Zero(n)};
  if (y.q.size() != n || y.qd.size() != n) throw DimensionError("solve_dynamics: initial state size");

  DynamicsEvaluator eval(model);
  Trajectory traj;
  auto deriv = [&](double t, const State& s) {
    ++traj.evaluations;
    return State{s.qd, eval.acceleration(s.q, s.qd, signal(t))};
  };
  auto axpy = [](const State& a, double h, const State& k) { return State{a.q + h * k.q, a.qd + h * k.qd}; };

  const double period = 1.0 / options.sample_rate;
  const auto samples = static_cast<long>(std::floor(horizon * options.sample_rate + 1e-9));
  if (options.include_initial) {
    traj.time.push_back(0.0);
    traj.q.push_back(y.q);
    traj.qd.push_back(y.qd);
  }

  if (options.integrator == Integrator::imex) {
    const long sub = std::max(1L, static_cast<long>(std::ceil(period / options.dt - 1e-9)));
    const double h = period / static_cast<double>(sub);
    const double gamma = 1.0 - 1.0 / std::sqrt(2.0);
    const double delta = 1.0 - 1.0 / (2.0 * gamma);
    const double hg = h * gamma;
    const Eigen::MatrixXd& D = model.damping();
    const Eigen::MatrixXd& K = model.stiffness();
    Eigen::MatrixXd S;
    Eigen::LLT<Eigen::MatrixXd> s_llt;
    for (long k = 0; k < samples; ++k) {
      for (long s = 0; s < sub; ++s) {
        const double t = k * period + s * h;
        // Stage 1: explicit evaluation at y_n fixes the frozen mass matrix.
        ++traj.evaluations;
        eval.acceleration(y.q, y.qd, signal(t));
        const Eigen::MatrixXd M = eval.mass();
        const Eigen::VectorXd Me1 = eval.force() + D * y.qd + K * y.q;  // M * fE(Y1)
        S = M + hg * D + (hg * hg) * K;
        s_llt.compute(S);
        if (s_llt.info() != Eigen::Success) throw SolverError("dynamics: implicit stage matrix is not SPD", -1.0, t);
        const Eigen::VectorXd Mv = M * y.qd;

        // Stage 2.
        const Eigen::VectorXd v2 = s_llt.solve(Mv + hg * Me1 - hg * (K * y.q));
        const Eigen::VectorXd q2 = y.q + hg * v2;
        ++traj.evaluations;
        const Eigen::VectorXd a2 = eval.acceleration(q2, v2, signal(t + gamma * h));
        const Eigen::VectorXd Mi2 = -(D * v2 + K * q2);  // M * fI(Y2), velocity part
        const Eigen::VectorXd Me2 = M * a2 - Mi2;

        // Stage 3 (stiffly accurate: y_{n+1} = Y3).
        const Eigen::VectorXd q_star = y.q + h * (1.0 - gamma) * v2;
        const Eigen::VectorXd Mv_star = Mv + h * (delta * Me1 + (1.0 - delta) * Me2 + (1.0 - gamma) * Mi2);
        y.qd = s_llt.solve(Mv_star - hg * (K * q_star));
        y.q = q_star + hg * y.qd;
        ++traj.steps;
        check_finite(y, t + h);
      }
      traj.time.push_back((k + 1) * period);
      traj.q.push_back(y.q);
      traj.qd.push_back(y.qd);
    }
    return traj;
  }

  if (options.integrator == Integrator::rk4) {
    const long sub = std::max(1L, static_cast<long>(std::ceil(period / options.dt - 1e-9)));
    const double h = period / static_cast<double>(sub);
    for (long k = 0; k < samples; ++k) {
      for (long s = 0; s < sub; ++s) {
        const double t = k * period + s * h;
        const State k1 = deriv(t, y);
        const State k2 = deriv(t + 0.5 * h, axpy(y, 0.5 * h, k1));
        const State k3 = deriv(t + 0.5 * h, axpy(y, 0.5 * h, k2));
        const State k4 = deriv(t + h, axpy(y, h, k3));
        y.q += (h / 6.0) * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
        y.qd += (h / 6.0) * (k1.qd + 2.0 * k2.qd + 2.0 * k3.qd + k4.qd);
        ++traj.steps;
        check_finite(y, t + h);
      }
      traj.time.push_back((k + 1) * period);
      traj.q.push_back(y.q);
      traj.qd.push_back(y.qd);
    }
    return traj;
  }

  // Dormand-Prince 5(4) with the standard tableau.
  static const double a21 = 1.0 / 5.0;
  static const double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static const double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static const double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                      a54 = -212.0 / 729.0;
  static const double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                      a65 = -5103.0 / 18656.0;
  static const double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                      b6 = 11.0 / 84.0;
  static const double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                      e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  double t = 0.0;
  double h = std::min(options.dt, options.max_step);
  State k1 = deriv(t, y);
  for (long k = 0; k < samples; ++k) {
    const double target = (k + 1) * period;
    while (t < target - 1e-14) {
      const bool last = t + h >= target - 1e-14;
      const double step = last ? target - t : h;
      const State k2 = deriv(t + step / 5.0, axpy(y, step * a21, k1));
      State s3{y.q + step * (a31 * k1.q + a32 * k2.q), y.qd + step * (a31 * k1.qd + a32 * k2.qd)};
      const State k3 = deriv(t + 0.3 * step, s3);
      State s4{y.q + step * (a41 * k1.q + a42 * k2.q + a43 * k3.q),
               y.qd + step * (a41 * k1.qd + a42 * k2.qd + a43 * k3.qd)};
      const State k4 = deriv(t + 0.8 * step, s4);
      State s5{y.q + step * (a51 * k1.q + a52 * k2.q + a53 * k3.q + a54 * k4.q),
               y.qd + step * (a51 * k1.qd + a52 * k2.qd + a53 * k3.qd + a54 * k4.qd)};
      const State k5 = deriv(t + 8.0 / 9.0 * step, s5);
      State s6{y.q + step * (a61 * k1.q + a62 * k2.q + a63 * k3.q + a64 * k4.q + a65 * k5.q),
               y.qd + step * (a61 * k1.qd + a62 * k2.qd + a63 * k3.qd + a64 * k4.qd + a65 * k5.qd)};
      const State k6 = deriv(t + step, s6);
      State ynew{y.q + step * (b1 * k1.q + b3 * k3.q + b4 * k4.q + b5 * k5.q + b6 * k6.q),
                 y.qd + step * (b1 * k1.qd + b3 * k3.qd + b4 * k4.qd + b5 * k5.qd + b6 * k6.qd)};
      const State k7 = deriv(t + step, ynew);
      Eigen::VectorXd err_q = step * (e1 * k1.q + e3 * k3.q + e4 * k4.q + e5 * k5.q + e6 * k6.q + e7 * k7.q);
      Eigen::VectorXd err_v = step * (e1 * k1.qd + e3 * k3.qd + e4 * k4.qd + e5 * k5.qd + e6 * k6.qd + e7 * k7.qd);
      double err = 0.0;
      for (int i = 0; i < n; ++i) {
        const double sq = options.atol + options.rtol * std::max(std::abs(y.q(i)), std::abs(ynew.q(i)));
        const double sv = options.atol + options.rtol * std::max(std::abs(y.qd(i)), std::abs(ynew.qd(i)));
        err = std::max({err, std::abs(err_q(i)) / sq, std::abs(err_v(i)) / sv});
      }
      if (!std::isfinite(err)) err = 1e10;
      if (err <= 1.0) {
        t = last ? target : t + step;
        y = std::move(ynew);
        k1 = k7;
        ++traj.steps;
        check_finite(y, t);
      }
      const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      const double next = step * std::clamp(factor, 0.2, 5.0);
      if (!(last && err <= 1.0)) h = std::min(next, options.max_step);
      if (h < 1e-14) throw SolverError("dynamics: step size underflow", -1.0, t);
    }
    traj.time.push_back(target);
    traj.q.push_back(y.q);
    traj.qd.push_back(y.qd);
  }
  return traj;
}

double mechanical_energy(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
  KinematicState st;
  evaluate_kinematics(model, q, Eigen::VectorXd(), KinematicsLevel::jacobian, st);
  const Eigen::MatrixXd M = mass_matrix(model, st);
  return 0.5 * qd.dot(M * qd) + 0.5 * q.dot(model.stiffness() * q);
}

}  // namespace gvs
