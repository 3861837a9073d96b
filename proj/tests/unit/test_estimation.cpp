#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gvs/error.hpp"
#include "gvs/estimation.hpp"
#include "gvs/kinematics.hpp"

namespace gvs {
namespace {

// Linear bending in both planes: four coordinates, observable from three markers.
const std::array<int, 6> kBending{-1, 1, 1, -1, -1, -1};

Robot marked_robot() {
  Robot r = test::single_actuator_robot();
  r.markers = {{0, 0.125, Vec3(0, 0, 0.025)}, {0, 0.18, Vec3(0, 0.02, 0)}, {0, 0.25, Vec3(0, 0.01, 0)}, {0, 0.0, Vec3(0, 0, 0.01)}};
  return r;
}

EstimationProblem problem_for(const Model& m, double bound = 20.0) {
  EstimationProblem p;
  p.model = &m;
  p.estimation_markers = {0, 2, 3};
  p.evaluation_markers = {1};
  p.q_min = Eigen::VectorXd::Constant(m.dof(), -bound);
  p.q_max = Eigen::VectorXd::Constant(m.dof(), bound);
  return p;
}

std::vector<Vec3> select(const std::vector<Vec3>& all, const std::vector<int>& idx) {
  std::vector<Vec3> out;
  for (int i : idx) out.push_back(all[static_cast<std::size_t>(i)]);
  return out;
}

TEST(Markers, StraightRodPositions) {
  const Model m = test::rod_model(marked_robot(), kBending);
  const auto p = predict_markers(m, Eigen::VectorXd::Zero(m.dof()), {0, 1, 2, 3});
  EXPECT_TRUE(p[0].isApprox(Vec3(0.125, 0, 0.025), 1e-15));
  EXPECT_TRUE(p[1].isApprox(Vec3(0.18, 0.02, 0), 1e-15));
  EXPECT_TRUE(p[2].isApprox(Vec3(0.25, 0.01, 0), 1e-15));
  EXPECT_TRUE(p[3].isApprox(Vec3(0, 0, 0.01), 1e-15));
}

TEST(Markers, ConstantCurvatureArc) {
  Robot r = marked_robot();
  const Model m = make_full_model(r, {std::make_shared<test::ConstantRowBasis>(0.25, 2)});
  const double k = 5.0;
  Eigen::VectorXd q(1);
  q << k;
  const auto p = predict_markers(m, q, {0, 1, 2});
  for (int i = 0; i < 3; ++i) {
    const double x = r.markers[i].x;
    const Vec3 c(std::sin(k * x) / k, (1 - std::cos(k * x)) / k, 0);
    const Mat3 R = Eigen::AngleAxisd(k * x, Vec3::UnitZ()).toRotationMatrix();
    EXPECT_LT((p[i] - (c + R * r.markers[i].offset)).norm(), 1e-14) << i;
  }
}

TEST(Markers, ResidualJacobianMatchesDifferences) {
  const Model m = test::rod_model(marked_robot(), {2, 2, 2, 1, 1, 1});
  std::mt19937_64 rng(50);
  const std::vector<int> idx{0, 1, 2, 3};
  const double h = 1e-6;
  for (int draw = 0; draw < 50; ++draw) {
    const Eigen::VectorXd q = test::random_vector(rng, m.dof(), 3.0);
    const Eigen::MatrixXd J = residual_jacobian(m, q, idx);
    ASSERT_EQ(J.rows(), 12);
    Eigen::MatrixXd fd(12, m.dof());
    for (int c = 0; c < m.dof(); ++c) {
      Eigen::VectorXd qp = q, qm = q;
      qp(c) += h;
      qm(c) -= h;
      const auto a = predict_markers(m, qp, idx), b = predict_markers(m, qm, idx);
      for (int k = 0; k < 4; ++k) fd.block<3, 1>(3 * k, c) = (a[k] - b[k]) / (2 * h);
    }
    EXPECT_LT((J - fd).norm(), 1e-5 * (1 + fd.norm())) << "draw " << draw;
  }
}

TEST(Markers, JacobianScalesWithBasisColumns) {
  const Robot r = marked_robot();
  const Model full = test::rod_model(r, {2, 2, 2, 1, 1, 1});
  Eigen::MatrixXd phi_o(6 * full.table().phi.size(), full.dof());
  for (std::size_t k = 0; k < full.table().phi.size(); ++k) phi_o.middleRows(6 * k, 6) = full.table().phi[k];
  const Model a = make_concatenated_model(r, phi_o);
  const Model b = make_concatenated_model(r, 2.0 * phi_o);
  std::mt19937_64 rng(51);
  const Eigen::VectorXd q = test::random_vector(rng, full.dof(), 2.0);
  const Eigen::MatrixXd Ja = residual_jacobian(a, q, {0, 2});
  const Eigen::MatrixXd Jb = residual_jacobian(b, 0.5 * q, {0, 2});
  EXPECT_LT((Jb - 2.0 * Ja).cwiseAbs().maxCoeff(), 1e-12 * (1 + Ja.cwiseAbs().maxCoeff()));
}

TEST(Estimate, RestMeasurementGivesZero) {
  const Model m = test::rod_model(marked_robot(), kBending);
  const auto prob = problem_for(m);
  const auto meas = predict_markers(m, Eigen::VectorXd::Zero(m.dof()), prob.estimation_markers);
  const auto e = estimate_frame(prob, meas, Eigen::VectorXd::Zero(m.dof()));
  EXPECT_TRUE(e.q.isZero(0.0));
  EXPECT_EQ(e.cost, 0.0);
}

TEST(Estimate, SelfConsistentRecoveryAndHeldOut) {
  const Model m = test::rod_model(marked_robot(), kBending);
  const auto prob = problem_for(m);
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd truth = test::random_vector(rng, m.dof(), 6.0);
    const auto all = predict_markers(m, truth, {0, 1, 2, 3});
    const auto e = estimate_frame(prob, select(all, prob.estimation_markers), Eigen::VectorXd::Zero(m.dof()));
    EXPECT_TRUE(e.converged);
    EXPECT_LE(e.cost, e.initial_cost);
    const auto fit = predict_markers(m, e.q, prob.estimation_markers);
    for (std::size_t i = 0; i < fit.size(); ++i)
      EXPECT_LT((fit[i] - all[prob.estimation_markers[i]]).norm(), 1e-9);
    const auto held = evaluate_heldout(m, {e}, prob.evaluation_markers, {all});
    ASSERT_EQ(held.size(), 1u);
    EXPECT_LT(held[0].max, 1e-6);
  }
}

TEST(Estimate, FiniteDifferenceJacobianAgrees) {
  const Model m = test::rod_model(marked_robot(), kBending);
  const auto prob = problem_for(m);
  std::mt19937_64 rng(53);
  const Eigen::VectorXd truth = test::random_vector(rng, m.dof(), 6.0);
  const auto meas = predict_markers(m, truth, prob.estimation_markers);
  EstimationOptions fd;
  fd.analytic_jacobian = false;
  const auto a = estimate_frame(prob, meas, Eigen::VectorXd::Zero(m.dof()));
  const auto b = estimate_frame(prob, meas, Eigen::VectorXd::Zero(m.dof()), fd);
  EXPECT_LT((a.q - b.q).norm(), 1e-6 * (1 + a.q.norm()));
}

TEST(Estimate, StaysWithinBounds) {
  const Model m = test::rod_model(marked_robot(), kBending);
  const auto prob = problem_for(m, 2.0);
  Eigen::VectorXd truth = Eigen::VectorXd::Constant(m.dof(), 4.0);
  const auto meas = predict_markers(m, truth, prob.estimation_markers);
  const auto e = estimate_frame(prob, meas, Eigen::VectorXd::Zero(m.dof()));
  EXPECT_TRUE((e.q.array() >= prob.q_min.array()).all());
  EXPECT_TRUE((e.q.array() <= prob.q_max.array()).all());
  EXPECT_LE(e.cost, e.initial_cost);
  EXPECT_GT(e.cost, 0.0);
}

TEST(Estimate, SequenceAndEmptyHeldOut) {
  const Model m = test::rod_model(marked_robot(), kBending);
  const auto prob = problem_for(m);
  std::mt19937_64 rng(54);
  std::vector<std::vector<Vec3>> frames;
  for (int f = 0; f < 5; ++f) frames.push_back(predict_markers(m, test::random_vector(rng, m.dof(), 4.0), {0, 1, 2, 3}));
  const auto seq = estimate_sequence(prob, frames);
  ASSERT_EQ(seq.size(), 5u);
  const auto err = evaluate_heldout(m, seq, prob.evaluation_markers, frames);
  EXPECT_LT(err[0].mean, 1e-6);
  EXPECT_TRUE(evaluate_heldout(m, {}, prob.evaluation_markers, {}).empty());
  EstimationProblem bad = prob;
  bad.estimation_markers = {7};
  EXPECT_THROW(bad.validate(), DimensionError);
}

TEST(Estimate, SequenceRestartsWhenStalledOnBound) {
  const Model m = test::rod_model(marked_robot(), kBending);
  const auto prob = problem_for(m, 8.0);
  // Seed 13: the warm start of frame 23 stalls on the box; a restart from rest does not.
  std::mt19937_64 rng(13);
  std::vector<std::vector<Vec3>> frames;
  for (int f = 0; f < 30; ++f) frames.push_back(predict_markers(m, test::random_vector(rng, m.dof(), 7.6), {0, 1, 2, 3}));
  const auto seq = estimate_sequence(prob, frames);
  for (std::size_t f = 0; f < seq.size(); ++f) EXPECT_LT(std::sqrt(2 * seq[f].cost), 1e-9) << "frame " << f;
}

TEST(Registration, RecoversRigidTransform) {
  std::mt19937_64 rng(55);
  const Pose T = test::random_pose(rng);
  std::vector<Vec3> src, dst;
  for (int i = 0; i < 6; ++i) {
    src.push_back(test::random_vector(rng, 3, 0.2));
    dst.push_back(T.apply(src.back()));
  }
  const Pose est = register_base(src, dst);
  EXPECT_LT((est.matrix() - T.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(est.is_valid());
}

}  // namespace
}  // namespace gvs
