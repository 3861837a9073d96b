#pragma once

#include <functional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gvs/kinematics.hpp"
#include "gvs/model.hpp"
#include "gvs/signal.hpp"

namespace gvs {

// M qdd + (C + D) qd + K q + N(q) = B(q) T + F(q)
struct GeneralizedCoefficients {
  Eigen::MatrixXd M, C, D, K, B;
  Eigen::VectorXd F;
  Eigen::VectorXd N;  // nonlinear joint wall torques
};

GeneralizedCoefficients assemble(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd);

// Pieces of the assembly on an already evaluated kinematic state.
Eigen::MatrixXd mass_matrix(const Model& model, const KinematicState& st);
Eigen::MatrixXd actuation_matrix(const Model& model, const KinematicState& st);
Eigen::VectorXd external_force(const Model& model, const KinematicState& st);
Eigen::VectorXd joint_wall_force(const Model& model, const KinematicState& st);
// C qd from the velocity-level state (no Jdot needed).
Eigen::VectorXd coriolis_force(const Model& model, const KinematicState& st);

// Per lumped body (layout.bodies order): wrench about the CM frame from the
// chain cables; per disk-guided cable: wrench at each disk frame.
std::vector<Wrench> chain_cable_wrenches(const Model& model, const std::vector<Pose>& g,
                                         const Eigen::VectorXd& tensions);
std::vector<std::vector<Wrench>> disk_wrenches(const Model& model, const std::vector<Pose>& g,
                                               const Eigen::VectorXd& tensions);

// r(q) = K q + N(q) - B(q) T - F(q)
Eigen::VectorXd static_residual(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& tensions);

struct StaticsOptions {
  double tolerance = 1e-9;  // on |r|_inf relative to the largest force term
  int max_iterations = 200;
  int max_halvings = 30;
};

struct StaticsResult {
  Eigen::VectorXd q;
  double residual = 0.0;
  int iterations = 0;
};

StaticsResult solve_statics(const Model& model, const Eigen::VectorXd& tensions,
                            const Eigen::VectorXd& initial = Eigen::VectorXd(),
                            const StaticsOptions& options = {});

// rk4: classic fixed step. rk45: Dormand-Prince with error control.
// imex: second-order additive Runge-Kutta (ARS 2-2-2). The constant D and K
// terms are taken implicitly with M frozen over the step; everything else is
// explicit. Meant for Kelvin-Voigt damping, which makes the explicit schemes
// step-limited by the shear/elongation modes.
enum class Integrator { rk4, rk45, imex };

struct DynamicsOptions {
  Integrator integrator = Integrator::rk4;
  double dt = 1e-3;            // rk4 step / rk45 initial step
  double sample_rate = 100.0;  // Hz
  bool include_initial = true;
  double rtol = 1e-6;
  double atol = 1e-9;
  double max_step = 1e-2;
};

struct Trajectory {
  std::vector<double> time;
  std::vector<Eigen::VectorXd> q;
  std::vector<Eigen::VectorXd> qd;
  long evaluations = 0;
  long steps = 0;
};

// Right-hand side of the equations of motion with reusable scratch storage.
class DynamicsEvaluator {
 public:
  explicit DynamicsEvaluator(const Model& model);
  // Generalized acceleration; throws SolverError when M is not SPD.
  const Eigen::VectorXd& acceleration(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                                      const Eigen::VectorXd& tensions);
  // Mass matrix, its factorization and the total force of the last call.
  const Eigen::MatrixXd& mass() const { return M_; }
  const Eigen::LLT<Eigen::MatrixXd>& mass_factor() const { return llt_; }
  const Eigen::VectorXd& force() const { return rhs_; }

 private:
  const Model& model_;
  KinematicState st_;
  Eigen::MatrixXd M_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd acc_;
};

Trajectory solve_dynamics(const Model& model, const ActuationSignal& signal, double horizon,
                          const DynamicsOptions& options = {}, const Eigen::VectorXd& q0 = Eigen::VectorXd(),
                          const Eigen::VectorXd& qd0 = Eigen::VectorXd());

// 1/2 qd^T M qd + 1/2 q^T K q (linear elastic part only).
double mechanical_energy(const Model& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qd);

}  // namespace gvs
