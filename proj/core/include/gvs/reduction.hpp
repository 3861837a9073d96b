#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gvs/basis.hpp"
#include "gvs/dynamics.hpp"
#include "gvs/model.hpp"
#include "gvs/signal.hpp"

namespace gvs {

enum class SnapshotLayout {
  by_component,  // one soft link: [k_x(X_0..X_p-1), k_y(..), ..., l_z(..)]
  by_point,      // every strain point of the chain: [xi_1 - xi_1*, ..., xi_p - xi_p*]
};

const char* to_string(SnapshotLayout layout);
SnapshotLayout snapshot_layout_from_string(const std::string& name);

struct SnapshotMatrix {
  Eigen::MatrixXd data;  // 6p x s
  SnapshotLayout layout = SnapshotLayout::by_point;
  std::vector<double> abscissae;
  std::map<std::string, std::string> metadata;

  Eigen::Index points() const { return data.rows() / 6; }
  Eigen::Index count() const { return data.cols(); }
};

// Samples strain deviations of a model at its computational points.
class SnapshotSampler {
 public:
  SnapshotSampler(const Model& model, SnapshotLayout layout);

  Eigen::VectorXd sample(const Model& model, const Eigen::VectorXd& q) const;
  SnapshotLayout layout() const { return layout_; }
  const std::vector<double>& abscissae() const { return abscissae_; }
  Eigen::Index rows() const { return 6 * static_cast<Eigen::Index>(points_.size()); }

 private:
  SnapshotLayout layout_;
  std::vector<int> points_;  // strain point per sample
  std::vector<double> abscissae_;
};

struct SweepResult {
  SnapshotMatrix snapshots;
  std::vector<Eigen::VectorXd> solutions;  // per grid entry; empty on failure
  std::vector<std::size_t> failed;
};

// All combinations of `levels` over `channels` actuators; channel 0 varies slowest.
std::vector<Eigen::VectorXd> tension_grid(int channels, const std::vector<double>& levels);

SweepResult collect_static_sweep(const Model& model, const std::vector<Eigen::VectorXd>& grid,
                                 SnapshotLayout layout, int jobs = 1, const StaticsOptions& options = {});

SnapshotMatrix snapshots_from_trajectory(const Model& model, const Trajectory& traj, SnapshotLayout layout);

// Integrates the signal and samples strains at options.sample_rate; t = 0 is
// excluded so a 60 s run at 100 Hz yields 6000 columns.
SnapshotMatrix collect_babbling(const Model& model, const ActuationSignal& signal, double horizon,
                                DynamicsOptions options, SnapshotLayout layout);

struct PodResult {
  Eigen::MatrixXd U;      // 6p x m
  Eigen::VectorXd sigma;  // m, descending
  Eigen::MatrixXd V;      // s x m
  SnapshotLayout layout = SnapshotLayout::by_point;
  std::vector<double> abscissae;
};

// Symmetric eigen-decomposition by cyclic Jacobi; eigenvalues descending.
void jacobi_eigen(const Eigen::MatrixXd& sym, Eigen::VectorXd& values, Eigen::MatrixXd& vectors,
                  double relative_tolerance = 1e-14, int max_sweeps = 100);

PodResult pod(const SnapshotMatrix& snapshots);

double energy_fraction(const PodResult& result, int r);

// Singular values at or below kNullSigma * sigma_1 are treated as zero; their
// modes are orthonormal completions that carry no snapshot content.
inline constexpr double kNullSigma = 1e-13;
int numerical_rank(const PodResult& result);

struct ReducedBasis {
  SnapshotLayout layout = SnapshotLayout::by_point;
  Eigen::MatrixXd modes;  // 6p x n
  std::vector<double> abscissae;
  Eigen::VectorXd sigma;  // retained singular values
  Eigen::VectorXd q_min, q_max;

  int dof() const { return static_cast<int>(modes.cols()); }
};

ReducedBasis build_reduced_basis(const PodResult& result, int n);
// Leading n modes of a basis (bounds are per mode, so they carry over).
ReducedBasis truncate(const ReducedBasis& basis, int n);

// Model of `robot` parameterized by the reduced basis. The continuous layout
// needs a robot made of a single soft link.
Model reduced_model(const Robot& robot, const ReducedBasis& basis);

std::vector<Vec3> tip_trajectory(const Model& model, const Trajectory& traj);

struct TruncationRow {
  int n = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double max_error = 0.0;
  double total_error = 0.0;
  double seconds = 0.0;
  double normalized_time = 0.0;
  bool ok = true;
  std::string message;
};

// Re-simulates the test signal with each ROM size and compares tip paths.
std::vector<TruncationRow> truncation_sweep(const Robot& robot, const ReducedBasis& basis,
                                            const ActuationSignal& test, double horizon,
                                            const DynamicsOptions& options, const std::vector<int>& n_list,
                                            const std::vector<Vec3>& reference_tips, double reference_seconds);

// Static variant: one ROM solve per tension set, errors summed over the sets.
std::vector<TruncationRow> static_truncation_sweep(const Robot& robot, const ReducedBasis& basis,
                                                   const std::vector<Eigen::VectorXd>& tension_sets,
                                                   const std::vector<int>& n_list,
                                                   const std::vector<Vec3>& reference_tips,
                                                   double reference_seconds, const StaticsOptions& options = {});

}  // namespace gvs
