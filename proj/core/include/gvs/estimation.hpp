#pragma once

#include <vector>

#include <Eigen/Core>

#include "gvs/model.hpp"
#include "gvs/screw.hpp"

namespace gvs {

// World positions of the selected markers (indices into robot.markers).
std::vector<Vec3> predict_markers(const Model& model, const Eigen::VectorXd& q, const std::vector<int>& markers);

// d(stacked marker positions)/dq, 3*markers x dof.
Eigen::MatrixXd residual_jacobian(const Model& model, const Eigen::VectorXd& q, const std::vector<int>& markers);

struct EstimationOptions {
  int max_iterations = 100;
  double initial_lambda = 1e-3;
  double step_tolerance = 1e-10;
  double decrease_tolerance = 1e-12;
  bool analytic_jacobian = true;
  double fd_step = 1e-7;  // central differences when analytic_jacobian is false
};

struct EstimationProblem {
  const Model* model = nullptr;
  std::vector<int> estimation_markers;
  std::vector<int> evaluation_markers;
  Eigen::VectorXd q_min, q_max;

  void validate() const;
};

struct FrameEstimate {
  Eigen::VectorXd q;
  double cost = 0.0;  // 0.5 * |e|^2
  double initial_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
};

// measured: one position per estimation marker, in problem order.
FrameEstimate estimate_frame(const EstimationProblem& problem, const std::vector<Vec3>& measured,
                             const Eigen::VectorXd& q_init, const EstimationOptions& options = {});

// measured[f][m]: position of robot marker m at frame f (all declared markers).
std::vector<FrameEstimate> estimate_sequence(const EstimationProblem& problem,
                                             const std::vector<std::vector<Vec3>>& measured,
                                             const EstimationOptions& options = {},
                                             Eigen::VectorXd q_init = {});

struct MarkerError {
  int marker = 0;
  double mean = 0.0;
  double max = 0.0;
};

// Per-marker position errors over a sequence; empty when there are no frames.
std::vector<MarkerError> evaluate_heldout(const Model& model, const std::vector<FrameEstimate>& estimates,
                                          const std::vector<int>& markers,
                                          const std::vector<std::vector<Vec3>>& measured);

// Rigid transform T minimizing sum |T * source_i - target_i|^2 (Kabsch).
Pose register_base(const std::vector<Vec3>& source, const std::vector<Vec3>& target);

}  // namespace gvs
