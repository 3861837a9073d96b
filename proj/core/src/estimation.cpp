#include "gvs/estimation.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "gvs/error.hpp"
#include "gvs/kinematics.hpp"

namespace gvs {

namespace {

void check_markers(const Model& model, const std::vector<int>& markers) {
  const int count = static_cast<int>(model.robot().markers.size());
  for (int m : markers)
    if (m < 0 || m >= count) throw DimensionError("marker index " + std::to_string(m) + " out of range");
}

void check_q(const Model& model, const Eigen::VectorXd& q) {
  if (q.size() != model.dof())
    throw DimensionError("q has " + std::to_string(q.size()) + " entries, model has " + std::to_string(model.dof()));
}

Vec3 marker_position(const Model& model, const std::vector<Pose>& g, int m) {
  const Pose& pose = g[model.layout().marker_frames[m]];
  return pose.apply(model.robot().markers[m].offset);
}

Eigen::VectorXd stack(const std::vector<Vec3>& p) {
  Eigen::VectorXd out(3 * static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) out.segment<3>(3 * static_cast<Eigen::Index>(i)) = p[i];
  return out;
}

Eigen::VectorXd residual(const EstimationProblem& pb, const Eigen::VectorXd& q, const Eigen::VectorXd& target) {
  return stack(predict_markers(*pb.model, q, pb.estimation_markers)) - target;
}

Eigen::MatrixXd fd_jacobian(const EstimationProblem& pb, const Eigen::VectorXd& q, double step) {
  const Eigen::Index n = q.size();
  Eigen::MatrixXd J(3 * static_cast<Eigen::Index>(pb.estimation_markers.size()), n);
  Eigen::VectorXd qp = q, qm = q;
  for (Eigen::Index i = 0; i < n; ++i) {
    qp[i] = q[i] + step;
    qm[i] = q[i] - step;
    J.col(i) = (stack(predict_markers(*pb.model, qp, pb.estimation_markers)) -
                stack(predict_markers(*pb.model, qm, pb.estimation_markers))) /
               (2.0 * step);
    qp[i] = qm[i] = q[i];
  }
  return J;
}

bool on_bound(const EstimationProblem& pb, const Eigen::VectorXd& q) {
  return (q.array() <= pb.q_min.array()).any() || (q.array() >= pb.q_max.array()).any();
}

}  // namespace

std::vector<Vec3> predict_markers(const Model& model, const Eigen::VectorXd& q, const std::vector<int>& markers) {
  check_q(model, q);
  check_markers(model, markers);
  const auto g = forward_kinematics(model, q);
  std::vector<Vec3> out;
  out.reserve(markers.size());
  for (int m : markers) out.push_back(marker_position(model, g, m));
  return out;
}

Eigen::MatrixXd residual_jacobian(const Model& model, const Eigen::VectorXd& q, const std::vector<int>& markers) {
  check_q(model, q);
  check_markers(model, markers);
  KinematicState ks;
  evaluate_kinematics(model, q, {}, KinematicsLevel::jacobian, ks);
  Eigen::MatrixXd out(3 * static_cast<Eigen::Index>(markers.size()), model.dof());
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const int m = markers[i];
    const int frame = model.layout().marker_frames[m];
    const Mat6X& J = ks.J[frame];
    const Vec3& r = model.robot().markers[m].offset;
    // Spatial velocity of a body-fixed point: R (w x r + v).
    const Mat3X local = -tilde(r) * J.topRows<3>() + J.bottomRows<3>();
    out.middleRows<3>(3 * static_cast<Eigen::Index>(i)) = ks.g[frame].R * local;
  }
  return out;
}

void EstimationProblem::validate() const {
  if (!model) throw InvalidSpec("estimation problem has no model");
  if (estimation_markers.empty()) throw InvalidSpec("at least one estimation marker is required");
  check_markers(*model, estimation_markers);
  check_markers(*model, evaluation_markers);
  const int n = model->dof();
  if (q_min.size() != n || q_max.size() != n) throw DimensionError("bounds do not match model dof");
  for (int i = 0; i < n; ++i)
    if (!(q_min[i] <= q_max[i])) throw InvalidSpec("bounds are not ordered at index " + std::to_string(i));
}

FrameEstimate estimate_frame(const EstimationProblem& pb, const std::vector<Vec3>& measured,
                             const Eigen::VectorXd& q_init, const EstimationOptions& opt) {
  pb.validate();
  if (measured.size() != pb.estimation_markers.size())
    throw DimensionError("one measurement per estimation marker is required");
  check_q(*pb.model, q_init);
  const auto t0 = std::chrono::steady_clock::now();

  const Eigen::VectorXd target = stack(measured);
  const Eigen::Index n = q_init.size();
  FrameEstimate est;
  est.q = q_init.cwiseMax(pb.q_min).cwiseMin(pb.q_max);
  Eigen::VectorXd e = residual(pb, est.q, target);
  est.cost = est.initial_cost = 0.5 * e.squaredNorm();
  double lambda = opt.initial_lambda;

  for (int it = 0; it < opt.max_iterations && !est.converged; ++it) {
    est.iterations = it + 1;
    const Eigen::MatrixXd J =
        opt.analytic_jacobian ? residual_jacobian(*pb.model, est.q, pb.estimation_markers) : fd_jacobian(pb, est.q, opt.fd_step);
    const Eigen::VectorXd grad = J.transpose() * e;
    const Eigen::MatrixXd JtJ = J.transpose() * J;

    // Coordinates on a bound whose descent direction points outward stay frozen.
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_low = est.q[i] <= pb.q_min[i] && grad[i] > 0.0;
      const bool at_high = est.q[i] >= pb.q_max[i] && grad[i] < 0.0;
      if (!at_low && !at_high) free.push_back(i);
    }
    if (free.empty()) {
      est.converged = true;
      break;
    }
    const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd A(nf, nf);
    Eigen::VectorXd g(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      g[a] = grad[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b) A(a, b) = JtJ(free[a], free[b]);
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd Ad = A;
      Ad.diagonal() += lambda * A.diagonal().cwiseMax(1e-12);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Ad);
      Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
      if (ldlt.info() == Eigen::Success) {
        const Eigen::VectorXd d = -ldlt.solve(g);
        for (Eigen::Index a = 0; a < nf; ++a) step[free[a]] = d[a];
      }
      const Eigen::VectorXd trial = (est.q + step).cwiseMax(pb.q_min).cwiseMin(pb.q_max);
      const Eigen::VectorXd actual = trial - est.q;
      if (actual.norm() < opt.step_tolerance) {
        est.converged = true;
        break;
      }
      const Eigen::VectorXd e_trial = residual(pb, trial, target);
      const double cost = 0.5 * e_trial.squaredNorm();
      if (std::isfinite(cost) && cost < est.cost) {
        const double decrease = (est.cost - cost) / std::max(est.cost, 1e-300);
        est.q = trial;
        e = e_trial;
        est.cost = cost;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (decrease < opt.decrease_tolerance) est.converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No descent left at working precision.
          est.converged = true;
          break;
        }
      }
    }
  }
  est.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

std::vector<FrameEstimate> estimate_sequence(const EstimationProblem& pb, const std::vector<std::vector<Vec3>>& measured,
                                             const EstimationOptions& options, Eigen::VectorXd q_init) {
  pb.validate();
  if (q_init.size() == 0) q_init = Eigen::VectorXd::Zero(pb.model->dof());
  const Eigen::VectorXd q_start = q_init;
  const std::size_t declared = pb.model->robot().markers.size();
  std::vector<FrameEstimate> out;
  out.reserve(measured.size());
  for (const auto& frame : measured) {
    if (frame.size() != declared) throw DimensionError("measurement frame does not list every declared marker");
    std::vector<Vec3> subset;
    for (int m : pb.estimation_markers) subset.push_back(frame[m]);
    FrameEstimate e = estimate_frame(pb, subset, q_init, options);
    // A warm start can run into the box and stall there; retry from the start state.
    if (e.cost > 0.0 && on_bound(pb, e.q) && q_init != q_start) {
      FrameEstimate retry = estimate_frame(pb, subset, q_start, options);
      retry.seconds += e.seconds;
      if (retry.cost < e.cost) e = std::move(retry);
      else e.seconds = retry.seconds;
    }
    out.push_back(std::move(e));
    q_init = out.back().q;
  }
  return out;
}

std::vector<MarkerError> evaluate_heldout(const Model& model, const std::vector<FrameEstimate>& estimates,
                                          const std::vector<int>& markers,
                                          const std::vector<std::vector<Vec3>>& measured) {
  if (estimates.empty()) return {};
  if (measured.size() != estimates.size()) throw DimensionError("one measurement frame per estimate is required");
  std::vector<MarkerError> out(markers.size());
  for (std::size_t i = 0; i < markers.size(); ++i) out[i].marker = markers[i];
  for (std::size_t f = 0; f < estimates.size(); ++f) {
    const auto p = predict_markers(model, estimates[f].q, markers);
    for (std::size_t i = 0; i < markers.size(); ++i) {
      const double err = (p[i] - measured[f][markers[i]]).norm();
      out[i].mean += err;
      out[i].max = std::max(out[i].max, err);
    }
  }
  for (auto& m : out) m.mean /= static_cast<double>(estimates.size());
  return out;
}

Pose register_base(const std::vector<Vec3>& source, const std::vector<Vec3>& target) {
  if (source.size() != target.size() || source.size() < 3)
    throw DimensionError("registration needs at least three paired points");
  Vec3 cs = Vec3::Zero(), ct = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cs += source[i];
    ct += target[i];
  }
  cs /= static_cast<double>(source.size());
  ct /= static_cast<double>(source.size());
  Mat3 H = Mat3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) H += (source[i] - cs) * (target[i] - ct).transpose();
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) D(2, 2) = -1.0;
  Pose T;
  T.R = svd.matrixV() * D * svd.matrixU().transpose();
  T.r = ct - T.R * cs;
  return T;
}

}  // namespace gvs
