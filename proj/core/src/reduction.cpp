#include "gvs/reduction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>

#include <Eigen/Jacobi>

#include "gvs/error.hpp"
#include "gvs/kinematics.hpp"
#include "gvs/parallel.hpp"

namespace gvs {

const char* to_string(SnapshotLayout layout) {
  return layout == SnapshotLayout::by_component ? "by_component" : "by_point";
}

SnapshotLayout snapshot_layout_from_string(const std::string& name) {
  if (name == "by_component" || name == "continuous") return SnapshotLayout::by_component;
  if (name == "by_point" || name == "discrete") return SnapshotLayout::by_point;
  throw InvalidSpec("unknown snapshot layout '" + name + "'");
}

SnapshotSampler::SnapshotSampler(const Model& model, SnapshotLayout layout) : layout_(layout) {
  const auto& lay = model.layout();
  if (layout == SnapshotLayout::by_point) {
    for (int k = 0; k < static_cast<int>(lay.strain_points.size()); ++k) {
      points_.push_back(k);
      abscissae_.push_back(lay.strain_points[k].x);
    }
    return;
  }
  int link = -1;
  for (int e = 0; e < static_cast<int>(model.robot().elements.size()); ++e) {
    if (std::holds_alternative<SoftLinkSpec>(model.robot().elements[e])) {
      link = e;
      break;
    }
  }
  if (link < 0) throw InvalidSpec("by_component snapshots need a soft link");
  for (int k : lay.strain_points_of(link)) {
    const double x = lay.strain_points[k].x;
    if (!abscissae_.empty() && x <= abscissae_.back()) continue;
    points_.push_back(k);
    abscissae_.push_back(x);
  }
}

Eigen::VectorXd SnapshotSampler::sample(const Model& model, const Eigen::VectorXd& q) const {
  const auto& tab = model.table();
  const auto p = static_cast<Eigen::Index>(points_.size());
  Eigen::VectorXd out(6 * p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const int k = points_[static_cast<std::size_t>(i)];
    const Twist dev = tab.phi[k] * q;  // xi - xi*
    for (int c = 0; c < 6; ++c) {
      if (layout_ == SnapshotLayout::by_point) {
        out(6 * i + c) = dev(c);
      } else {
        out(c * p + i) = dev(c);
      }
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> tension_grid(int channels, const std::vector<double>& levels) {
  if (channels < 1 || levels.empty()) throw InvalidSpec("tension_grid: empty grid");
  std::size_t total = 1;
  for (int c = 0; c < channels; ++c) total *= levels.size();
  std::vector<Eigen::VectorXd> grid(total, Eigen::VectorXd(channels));
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (int c = channels - 1; c >= 0; --c) {
      grid[i](c) = levels[rest % levels.size()];
      rest /= levels.size();
    }
  }
  return grid;
}

SweepResult collect_static_sweep(const Model& model, const std::vector<Eigen::VectorXd>& grid,
                                 SnapshotLayout layout, int jobs, const StaticsOptions& options) {
  if (grid.empty()) throw InvalidSpec("collect_static_sweep: empty grid");
  const SnapshotSampler sampler(model, layout);
  SweepResult out;
  out.solutions.assign(grid.size(), Eigen::VectorXd());
  std::vector<std::string> errors(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    try {
      out.solutions[i] = solve_statics(model, grid[i], Eigen::VectorXd(), options).q;
    } catch (const SolverError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (out.solutions[i].size() == 0) {
      out.failed.push_back(i);
      std::cerr << "gvs: static solve " << i << " failed: " << errors[i] << "\n";
    } else {
      ok.push_back(i);
    }
  }
  if (!out.failed.empty())
    std::cerr << "gvs: " << ok.size() << " of " << grid.size() << " snapshots collected\n";
  out.snapshots.layout = layout;
  out.snapshots.abscissae = sampler.abscissae();
  out.snapshots.data.resize(sampler.rows(), static_cast<Eigen::Index>(ok.size()));
  for (std::size_t j = 0; j < ok.size(); ++j)
    out.snapshots.data.col(static_cast<Eigen::Index>(j)) = sampler.sample(model, out.solutions[ok[j]]);
  out.snapshots.metadata["source"] = "static_sweep";
  return out;
}

SnapshotMatrix snapshots_from_trajectory(const Model& model, const Trajectory& traj, SnapshotLayout layout) {
  const SnapshotSampler sampler(model, layout);
  SnapshotMatrix s;
  s.layout = layout;
  s.abscissae = sampler.abscissae();
  s.data.resize(sampler.rows(), static_cast<Eigen::Index>(traj.q.size()));
  for (std::size_t j = 0; j < traj.q.size(); ++j) s.data.col(static_cast<Eigen::Index>(j)) = sampler.sample(model, traj.q[j]);
  return s;
}

SnapshotMatrix collect_babbling(const Model& model, const ActuationSignal& signal, double horizon,
                                DynamicsOptions options, SnapshotLayout layout) {
  if (!(horizon > 0.0)) throw InvalidSpec("collect_babbling: horizon must be positive");
  options.include_initial = false;
  const Trajectory traj = solve_dynamics(model, signal, horizon, options);
  SnapshotMatrix s = snapshots_from_trajectory(model, traj, layout);
  s.metadata["source"] = "babbling";
  return s;
}

void jacobi_eigen(const Eigen::MatrixXd& sym, Eigen::VectorXd& values, Eigen::MatrixXd& vectors,
                  double relative_tolerance, int max_sweeps) {
  const Eigen::Index m = sym.rows();
  if (sym.cols() != m) throw DimensionError("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd A = 0.5 * (sym + sym.transpose());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(m, m);
  const double scale = std::max(A.diagonal().cwiseAbs().sum(), A.norm());
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < j; ++i) s += A(i, j) * A(i, j);
    return std::sqrt(2.0 * s);
  };
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= relative_tolerance * scale) break;
    for (Eigen::Index p = 0; p < m - 1; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        if (A(p, q) == 0.0) continue;
        Eigen::JacobiRotation<double> rot;
        rot.makeJacobi(A, p, q);
        A.applyOnTheLeft(p, q, rot.adjoint());
        A.applyOnTheRight(p, q, rot);
        A(p, q) = A(q, p) = 0.0;
        V.applyOnTheRight(p, q, rot);
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return A(a, a) > A(b, b); });
  values.resize(m);
  vectors.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    values(i) = A(order[i], order[i]);
    vectors.col(i) = V.col(order[i]);
  }
}

namespace {

// Orthonormalizes columns in order (two passes of modified Gram-Schmidt);
// columns that vanish are replaced by the unit vector farthest from the span.
// `active` flags rows that carry data; completion vectors are drawn from those
// first so padded modes never point along structurally zero strains.
void orthonormalize(Eigen::MatrixXd& Q, const std::vector<bool>& active) {
  const Eigen::Index cols = Q.cols(), rows = Q.rows();
  for (Eigen::Index j = 0; j < cols; ++j) {
    Eigen::VectorXd v = Q.col(j);
    const double n0 = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    if (!(n0 > 0.0) || v.norm() < 0.5 * n0 || v.norm() < 1e-300) {
      // Completion: the coordinate axis least represented in the span.
      const Eigen::VectorXd covered =
          j > 0 ? Eigen::VectorXd(Q.leftCols(j).rowwise().squaredNorm()) : Eigen::VectorXd::Zero(rows);
      Eigen::Index r = -1;
      for (int pick_inactive = 0; pick_inactive < 2 && r < 0; ++pick_inactive)
        for (Eigen::Index i = 0; i < rows; ++i)
          if (active[static_cast<std::size_t>(i)] != static_cast<bool>(pick_inactive) && covered(i) < 1.0 - 1e-8 &&
              (r < 0 || covered(i) < covered(r)))
            r = i;
      if (r < 0) covered.minCoeff(&r);
      v = Eigen::VectorXd::Unit(rows, r);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < j; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    }
    Q.col(j) = v / v.norm();
  }
}

}  // namespace

PodResult pod(const SnapshotMatrix& snapshots) {
  const Eigen::MatrixXd& X = snapshots.data;
  const Eigen::Index rows = X.rows(), cols = X.cols();
  if (cols < 1 || rows < 1) throw DimensionError("pod: empty snapshot matrix");
  PodResult res;
  res.layout = snapshots.layout;
  res.abscissae = snapshots.abscissae;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd W;
  const bool tall = rows > cols;
  if (!tall) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, rows);
    G.selfadjointView<Eigen::Lower>().rankUpdate(X);
    G = G.selfadjointView<Eigen::Lower>();
    jacobi_eigen(G, lambda, W);
  } else {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(cols, cols);
    G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    G = G.selfadjointView<Eigen::Lower>();
    jacobi_eigen(G, lambda, W);
  }
  const Eigen::Index m = std::min(rows, cols);
  res.sigma = lambda.head(m).cwiseMax(0.0).cwiseSqrt();
  const double cut = res.sigma(0) * kNullSigma;
  Eigen::MatrixXd other = tall ? Eigen::MatrixXd(X * W.leftCols(m)) : Eigen::MatrixXd(X.transpose() * W.leftCols(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    if (res.sigma(i) > cut && res.sigma(i) > 0.0) {
      other.col(i) /= res.sigma(i);
    } else {
      other.col(i).setZero();
    }
  }
  std::vector<bool> active(static_cast<std::size_t>(other.rows()));
  for (Eigen::Index i = 0; i < other.rows(); ++i)
    active[static_cast<std::size_t>(i)] = tall ? X.row(i).cwiseAbs().maxCoeff() > 0.0 : X.col(i).cwiseAbs().maxCoeff() > 0.0;
  orthonormalize(other, active);
  if (tall) {
    res.U = std::move(other);
    res.V = W.leftCols(m);
  } else {
    res.U = W.leftCols(m);
    res.V = std::move(other);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index arg;
    res.U.col(i).cwiseAbs().maxCoeff(&arg);
    if (res.U(arg, i) < 0.0) {
      res.U.col(i) *= -1.0;
      res.V.col(i) *= -1.0;
    }
  }
  return res;
}

int numerical_rank(const PodResult& result) {
  if (result.sigma.size() == 0) return 0;
  const double cut = result.sigma(0) * kNullSigma;
  int rank = 0;
  while (rank < result.sigma.size() && result.sigma(rank) > cut && result.sigma(rank) > 0.0) ++rank;
  return rank;
}

double energy_fraction(const PodResult& result, int r) {
  const auto m = result.sigma.size();
  if (r < 1 || r > m) throw InvalidSpec("energy_fraction: r must lie in [1, m]");
  const double total = result.sigma.squaredNorm();
  if (!(total > 0.0)) return 1.0;
  if (r == m) return 1.0;
  return result.sigma.head(r).squaredNorm() / total;
}

ReducedBasis build_reduced_basis(const PodResult& result, int n) {
  if (n < 1 || n > result.sigma.size()) throw InvalidSpec("build_reduced_basis: n must lie in [1, m]");
  ReducedBasis b;
  b.layout = result.layout;
  b.modes = result.U.leftCols(n);
  b.abscissae = result.abscissae;
  b.sigma = result.sigma.head(n);
  const Eigen::MatrixXd coords = b.sigma.asDiagonal() * result.V.leftCols(n).transpose();
  b.q_min = coords.rowwise().minCoeff();
  b.q_max = coords.rowwise().maxCoeff();
  return b;
}

ReducedBasis truncate(const ReducedBasis& basis, int n) {
  if (n < 1 || n > basis.dof()) throw InvalidSpec("truncate: n must lie in [1, " + std::to_string(basis.dof()) + "]");
  ReducedBasis b = basis;
  b.modes = basis.modes.leftCols(n);
  b.sigma = basis.sigma.head(n);
  b.q_min = basis.q_min.head(n);
  b.q_max = basis.q_max.head(n);
  return b;
}

Model reduced_model(const Robot& robot, const ReducedBasis& basis) {
  if (basis.layout == SnapshotLayout::by_point) return make_concatenated_model(robot, basis.modes);
  int soft = 0;
  const SoftLinkSpec* link = nullptr;
  for (const auto& e : robot.elements) {
    if (const auto* l = std::get_if<SoftLinkSpec>(&e)) {
      ++soft;
      link = l;
    }
  }
  if (soft != 1) throw InvalidSpec("reduced_model: continuous modes need exactly one soft link");
  auto pb = std::make_shared<PodBasis>(link->length, basis.abscissae, basis.modes);
  return make_full_model(robot, {pb});
}

std::vector<Vec3> tip_trajectory(const Model& model, const Trajectory& traj) {
  std::vector<Vec3> tips;
  tips.reserve(traj.q.size());
  KinematicState st;
  for (const auto& q : traj.q) {
    evaluate_kinematics(model, q, Eigen::VectorXd(), KinematicsLevel::pose, st);
    tips.push_back(st.g[model.layout().tip_frame].r);
  }
  return tips;
}

namespace {

void fill_stats(TruncationRow& row, const std::vector<double>& err) {
  if (err.empty()) return;
  const double n = static_cast<double>(err.size());
  row.total_error = std::accumulate(err.begin(), err.end(), 0.0);
  row.mean_error = row.total_error / n;
  double var = 0.0;
  for (double e : err) var += (e - row.mean_error) * (e - row.mean_error);
  row.std_error = std::sqrt(var / n);
  row.max_error = *std::max_element(err.begin(), err.end());
}

using Clock = std::chrono::steady_clock;

}  // namespace

std::vector<TruncationRow> truncation_sweep(const Robot& robot, const ReducedBasis& basis,
                                            const ActuationSignal& test, double horizon,
                                            const DynamicsOptions& options, const std::vector<int>& n_list,
                                            const std::vector<Vec3>& reference_tips, double reference_seconds) {
  std::vector<TruncationRow> rows;
  for (int n : n_list) {
    TruncationRow row;
    row.n = n;
    try {
      const Model rom = reduced_model(robot, truncate(basis, n));
      const auto t0 = Clock::now();
      const Trajectory traj = solve_dynamics(rom, test, horizon, options);
      row.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      const auto tips = tip_trajectory(rom, traj);
      if (tips.size() != reference_tips.size()) throw DimensionError("truncation_sweep: sample count differs");
      std::vector<double> err(tips.size());
      for (std::size_t i = 0; i < tips.size(); ++i) err[i] = (tips[i] - reference_tips[i]).norm();
      fill_stats(row, err);
      row.normalized_time = reference_seconds > 0.0 ? row.seconds / reference_seconds : 0.0;
    } catch (const Error& e) {
      row.ok = false;
      row.message = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<TruncationRow> static_truncation_sweep(const Robot& robot, const ReducedBasis& basis,
                                                   const std::vector<Eigen::VectorXd>& tension_sets,
                                                   const std::vector<int>& n_list,
                                                   const std::vector<Vec3>& reference_tips,
                                                   double reference_seconds, const StaticsOptions& options) {
  if (reference_tips.size() != tension_sets.size())
    throw DimensionError("static_truncation_sweep: one reference tip per tension set");
  std::vector<TruncationRow> rows;
  for (int n : n_list) {
    TruncationRow row;
    row.n = n;
    try {
      const Model rom = reduced_model(robot, truncate(basis, n));
      std::vector<double> err;
      double seconds = 0.0;
      for (std::size_t i = 0; i < tension_sets.size(); ++i) {
        const auto t0 = Clock::now();
        const auto sol = solve_statics(rom, tension_sets[i], Eigen::VectorXd(), options);
        seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        err.push_back((tip_position(rom, sol.q) - reference_tips[i]).norm());
      }
      row.seconds = seconds;
      fill_stats(row, err);
      row.normalized_time = reference_seconds > 0.0 ? seconds / reference_seconds : 0.0;
    } catch (const Error& e) {
      row.ok = false;
      row.message = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gvs
