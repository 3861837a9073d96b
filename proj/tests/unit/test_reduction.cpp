#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gvs/error.hpp"
#include "gvs/reduction.hpp"
#include "gvs/reduction_io.hpp"

namespace gvs {
namespace {

namespace fs = std::filesystem;

const std::array<int, 6> kLowOrders{2, 4, 4, 2, 2, 2};

SnapshotMatrix random_snapshots(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  SnapshotMatrix s;
  s.data.resize(rows, cols);
  std::normal_distribution<double> n;
  for (Eigen::Index i = 0; i < s.data.size(); ++i) s.data.data()[i] = n(rng);
  s.abscissae.resize(static_cast<std::size_t>(rows / 6));
  std::iota(s.abscissae.begin(), s.abscissae.end(), 0.0);
  return s;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gvs_unit";
  fs::create_directories(dir);
  return dir / name;
}

void expect_pod_invariants(const SnapshotMatrix& s) {
  const PodResult p = pod(s);
  const Eigen::Index m = std::min(s.data.rows(), s.data.cols());
  ASSERT_EQ(p.sigma.size(), m);
  EXPECT_LT((p.U.transpose() * p.U - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p.V.transpose() * p.V - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p.U * p.sigma.asDiagonal() * p.V.transpose() - s.data).cwiseAbs().maxCoeff(), 1e-11);
  for (Eigen::Index i = 1; i < m; ++i) EXPECT_GE(p.sigma(i - 1), p.sigma(i));
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index arg;
    p.U.col(i).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(p.U(arg, i), 0.0);
  }
}

TEST(Jacobi, MatchesEigenSolver) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd a = test::random_vector(rng, 400, 1.0).reshaped(20, 20);
  const Eigen::MatrixXd sym = a * a.transpose();
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  jacobi_eigen(sym, values, vectors);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(sym);
  const Eigen::VectorXd expected = ref.eigenvalues().reverse();
  EXPECT_LT((values - expected).cwiseAbs().maxCoeff(), 1e-12 * expected(0));
  for (int i = 0; i < 20; ++i)
    EXPECT_NEAR(std::abs(vectors.col(i).dot(ref.eigenvectors().col(19 - i))), 1.0, 1e-9) << i;
}

TEST(Pod, InvariantsTallAndWide) {
  std::mt19937_64 rng(2);
  expect_pod_invariants(random_snapshots(rng, 36, 12));
  expect_pod_invariants(random_snapshots(rng, 12, 30));
  expect_pod_invariants(random_snapshots(rng, 18, 18));
}

TEST(Pod, RankOne) {
  std::mt19937_64 rng(3);
  SnapshotMatrix s = random_snapshots(rng, 24, 5);
  const Eigen::VectorXd a = test::random_vector(rng, 24), b = test::random_vector(rng, 5);
  s.data = a * b.transpose();
  const PodResult p = pod(s);
  EXPECT_NEAR(p.sigma(0), a.norm() * b.norm(), 1e-12 * a.norm() * b.norm());
  // Singular values come from Gram eigenvalues, so zeros resolve to about sqrt(eps).
  EXPECT_LT(p.sigma.tail(4).maxCoeff(), 1e-7 * p.sigma(0));
  EXPECT_NEAR(std::abs(p.U.col(0).dot(a.normalized())), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(energy_fraction(p, 1), 1.0);
}

TEST(EnergyFraction, HandExample) {
  PodResult p;
  p.sigma = Eigen::Vector3d(2, 1, 1);
  EXPECT_NEAR(energy_fraction(p, 1), 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(energy_fraction(p, 2), 5.0 / 6.0, 1e-15);
  EXPECT_EQ(energy_fraction(p, 3), 1.0);
  EXPECT_THROW(energy_fraction(p, 0), InvalidSpec);
  EXPECT_THROW(energy_fraction(p, 4), InvalidSpec);
}

TEST(Pod, EckartYoungResidual) {
  std::mt19937_64 rng(4);
  const SnapshotMatrix s = random_snapshots(rng, 30, 10);
  const PodResult p = pod(s);
  for (int r = 1; r <= 10; ++r) {
    const Eigen::MatrixXd approx = p.U.leftCols(r) * p.sigma.head(r).asDiagonal() * p.V.leftCols(r).transpose();
    const double tail = p.sigma.tail(10 - r).squaredNorm();
    EXPECT_NEAR((s.data - approx).squaredNorm(), tail, 1e-10 * p.sigma.squaredNorm());
    EXPECT_NEAR(1.0 - energy_fraction(p, r), tail / p.sigma.squaredNorm(), 1e-12);
  }
}

TEST(Pod, ColumnPermutationInvariance) {
  std::mt19937_64 rng(5);
  const SnapshotMatrix s = random_snapshots(rng, 24, 9);
  SnapshotMatrix t = s;
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int c = 0; c < 9; ++c) t.data.col(c) = s.data.col(perm[c]);
  const PodResult a = pod(s), b = pod(t);
  EXPECT_LT((a.sigma - b.sigma).cwiseAbs().maxCoeff(), 1e-12 * a.sigma(0));
  EXPECT_LT((a.U - b.U).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pod, SingleSnapshotAndCompleteness) {
  std::mt19937_64 rng(6);
  const SnapshotMatrix one = random_snapshots(rng, 12, 1);
  const PodResult p = pod(one);
  ASSERT_EQ(p.sigma.size(), 1);
  EXPECT_NEAR(p.sigma(0), one.data.norm(), 1e-13);
  EXPECT_TRUE(p.U.col(0).cwiseAbs().isApprox(one.data.col(0).normalized().cwiseAbs(), 1e-14));

  const SnapshotMatrix wide = random_snapshots(rng, 12, 40);
  const PodResult w = pod(wide);
  EXPECT_LT((w.U * w.U.transpose() - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(pod(SnapshotMatrix{}), DimensionError);
}

TEST(Pod, CompletionStaysOnActiveRows) {
  std::mt19937_64 rng(7);
  SnapshotMatrix s = random_snapshots(rng, 18, 4);
  s.data.row(3).setZero();
  s.data.row(4).setZero();
  s.data.row(10).setZero();
  s.data.col(3) = s.data.col(0) + s.data.col(1);
  const PodResult p = pod(s);
  EXPECT_LT(p.sigma(3), 1e-12 * p.sigma(0));
  EXPECT_LT((p.U.transpose() * p.U - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  for (int r : {3, 4, 10}) EXPECT_TRUE(p.U.row(r).isZero(0.0)) << "row " << r;
}

TEST(Pod, NumericalRankStopsAtNullDirections) {
  PodResult hand;
  hand.sigma = Eigen::Vector4d(3.0, 1.0, 1e-14, 0.0);
  EXPECT_EQ(numerical_rank(hand), 2);
  std::mt19937_64 rng(13);
  SnapshotMatrix s = random_snapshots(rng, 24, 6);
  s.data.col(4) = s.data.col(0) - 2.0 * s.data.col(1);
  s.data.col(5).setZero();
  const PodResult p = pod(s);
  // A dependent column only resolves to the sqrt(eps) floor of the Gram matrix.
  EXPECT_LT(p.sigma(4), 1e-7 * p.sigma(0));
  EXPECT_GE(numerical_rank(p), 4);
  EXPECT_EQ(numerical_rank(pod(random_snapshots(rng, 12, 5))), 5);
}

TEST(ReducedBasis, BoundsContainProjectionsAndTruncate) {
  std::mt19937_64 rng(8);
  const SnapshotMatrix s = random_snapshots(rng, 30, 14);
  const PodResult p = pod(s);
  const ReducedBasis b = build_reduced_basis(p, 5);
  const Eigen::MatrixXd coords = b.modes.transpose() * s.data;
  for (Eigen::Index c = 0; c < coords.cols(); ++c)
    for (int i = 0; i < 5; ++i) {
      EXPECT_GE(coords(i, c), b.q_min(i) - 1e-12);
      EXPECT_LE(coords(i, c), b.q_max(i) + 1e-12);
    }
  const ReducedBasis t = truncate(b, 3);
  EXPECT_EQ(t.dof(), 3);
  EXPECT_EQ(t.modes, b.modes.leftCols(3));
  EXPECT_EQ(t.q_max, b.q_max.head(3));
  EXPECT_THROW(truncate(b, 6), InvalidSpec);
  EXPECT_THROW(build_reduced_basis(p, 15), InvalidSpec);
}

TEST(Sweep, TensionGridOrder) {
  const auto grid = tension_grid(3, {-1.0, 0.0, 2.0});
  ASSERT_EQ(grid.size(), 27u);
  EXPECT_EQ(grid[1], Eigen::Vector3d(-1, -1, 0));
  EXPECT_EQ(grid[3], Eigen::Vector3d(-1, 0, -1));
  EXPECT_EQ(grid[26], Eigen::Vector3d(2, 2, 2));
  std::vector<double> levels;
  for (int i = -10; i <= 10; ++i) levels.push_back(0.5 * i);
  EXPECT_EQ(tension_grid(1, levels).size(), 21u);
}

TEST(Sweep, SamplerMatchesStrainsByComponent) {
  const Model m = test::rod_model(test::single_actuator_robot(), kLowOrders);
  const SnapshotSampler sampler(m, SnapshotLayout::by_component);
  std::mt19937_64 rng(9);
  const Eigen::VectorXd q = test::random_vector(rng, m.dof(), 2.0);
  const Eigen::VectorXd col = sampler.sample(m, q);
  const auto& xs = sampler.abscissae();
  const auto p = static_cast<Eigen::Index>(xs.size());
  ASSERT_EQ(col.size(), 6 * p);
  const LegendreMonomialBasis basis(0.25, kLowOrders);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Twist xi = basis.evaluate(xs[static_cast<std::size_t>(i)]) * q;
    for (int c = 0; c < 6; ++c) EXPECT_NEAR(col(c * p + i), xi(c), 1e-12);
  }
  EXPECT_TRUE(std::is_sorted(xs.begin(), xs.end()));
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
  const Model m = test::rod_model(test::single_actuator_robot(), kLowOrders);
  const auto grid = tension_grid(1, {-6, -4, -2, 0, 1, 3});
  const auto a = collect_static_sweep(m, grid, SnapshotLayout::by_component, 1);
  const auto b = collect_static_sweep(m, grid, SnapshotLayout::by_component, 3);
  EXPECT_TRUE(a.failed.empty());
  EXPECT_EQ(a.snapshots.data, b.snapshots.data);
  EXPECT_TRUE(a.snapshots.data.col(3).isZero(0.0));
}

TEST(Sweep, ZeroBabblingGivesZeroSnapshots) {
  const Model m = test::rod_model(test::single_actuator_robot(), kLowOrders);
  DynamicsOptions opt;
  opt.integrator = Integrator::imex;
  const auto s = collect_babbling(m, ActuationSignal::babbling(1, 0.0, 0.0, 0.1, 0.2, 0.3, 1), 0.3, opt,
                                  SnapshotLayout::by_component);
  EXPECT_EQ(s.count(), 30);
  EXPECT_TRUE(s.data.isZero(0.0));
}

TEST(ReducedModel, FullRankRomReproducesTrainingEquilibria) {
  Robot robot = test::single_actuator_robot();
  const Model full = test::rod_model(robot, kLowOrders);
  const auto grid = tension_grid(1, {-8, -5, -2, 0});
  StaticsOptions opt;
  opt.tolerance = 1e-12;
  const auto sweep = collect_static_sweep(full, grid, SnapshotLayout::by_component, 1, opt);
  const PodResult p = pod(sweep.snapshots);
  int rank = 0;
  while (rank < p.sigma.size() && p.sigma(rank) > 1e-10 * p.sigma(0)) ++rank;
  const Model rom = reduced_model(robot, build_reduced_basis(p, rank));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto s = solve_statics(rom, grid[i], {}, opt);
    EXPECT_LT((tip_position(rom, s.q) - tip_position(full, sweep.solutions[i])).norm(), 1e-8) << i;
  }
}

TEST(FileIo, SnapshotsRoundTripExactly) {
  std::mt19937_64 rng(10);
  SnapshotMatrix s = random_snapshots(rng, 18, 7);
  s.layout = SnapshotLayout::by_component;
  s.data(0, 0) = 1.0 / 3.0;
  s.data(1, 0) = -0.0;
  s.data(2, 0) = 1e-300;
  s.metadata["source"] = "unit";
  const auto path = scratch("snap.txt").string();
  write_snapshots(path, s, {"abc123", 42});
  FileHeader h;
  const SnapshotMatrix r = read_snapshots(path, &h);
  EXPECT_EQ(r.data, s.data);
  EXPECT_EQ(r.abscissae, s.abscissae);
  EXPECT_EQ(r.layout, s.layout);
  EXPECT_EQ(r.metadata, s.metadata);
  EXPECT_EQ(h.config_hash, "abc123");
  EXPECT_EQ(h.seed, 42u);
}

TEST(FileIo, ModesRoundTripExactly) {
  std::mt19937_64 rng(11);
  const PodResult p = pod(random_snapshots(rng, 24, 9));
  ModeFile mf;
  mf.basis = build_reduced_basis(p, 4);
  mf.sigma_all = p.sigma;
  mf.metadata["k"] = "v";
  const auto path = scratch("modes.txt").string();
  write_modes(path, mf);
  const ModeFile r = read_modes(path);
  EXPECT_EQ(r.basis.modes, mf.basis.modes);
  EXPECT_EQ(r.basis.q_min, mf.basis.q_min);
  EXPECT_EQ(r.basis.q_max, mf.basis.q_max);
  EXPECT_EQ(r.sigma_all, mf.sigma_all);
  EXPECT_EQ(r.basis.sigma, mf.basis.sigma);
  write_modes(path + "2", r);
  std::ifstream a(path), b(path + "2");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(FileIo, MalformedValueNamesTheLine) {
  std::mt19937_64 rng(12);
  const auto path = scratch("bad.txt").string();
  write_snapshots(path, random_snapshots(rng, 12, 3));
  std::vector<std::string> lines;
  {
    std::ifstream is(path);
    for (std::string l; std::getline(is, l);) lines.push_back(l);
  }
  std::string& last = lines.back();
  const auto first = last.find(' ') + 1;
  last = last.substr(0, first) + "nope" + last.substr(last.find(' ', first));
  {
    std::ofstream os(path);
    for (const auto& l : lines) os << l << '\n';
  }
  try {
    read_snapshots(path);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":" + std::to_string(lines.size()) + ":"), std::string::npos) << msg;
    EXPECT_NE(msg.find("nope"), std::string::npos) << msg;
  }
  EXPECT_THROW(read_snapshots(scratch("missing.txt").string()), IoError);
}

}  // namespace
}  // namespace gvs
