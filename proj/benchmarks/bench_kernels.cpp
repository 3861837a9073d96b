#include <random>

#include <benchmark/benchmark.h>

#include "gvs/basis.hpp"
#include "gvs/dynamics.hpp"
#include "gvs/kinematics.hpp"
#include "gvs/reduction.hpp"

namespace gvs {
namespace {

// Tapered 25 cm rod with one converging cable, Legendre orders per strain row.
Model rod(int order, int gauss_points) {
  SoftLinkSpec s;
  s.length = 0.25;
  s.material = {1e6, 0.5, 1000.0, 1e4};
  s.section = {0.0125, 0.005};
  s.gauss_points = gauss_points;
  CableSpec c;
  c.offset_base = Vec3(0, 0, 0.01);
  c.offset_tip = Vec3(0, 0, 0.003);
  c.path_length = 0.25;
  c.x_begin = 0.0;
  c.x_end = 0.25;
  Robot r;
  r.elements.push_back(s);
  r.cables.push_back(c);
  const std::array<int, 6> orders{order, order, order, order, order, order};
  return make_full_model(r, {std::make_shared<LegendreMonomialBasis>(0.25, orders)});
}

Eigen::VectorXd random_q(Eigen::Index n, double scale, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd q(n);
  for (auto& v : q) v = u(rng);
  return q;
}

void BM_ExpSe3(benchmark::State& state) {
  Twist t;
  t << 0.3, -1.1, 0.7, 0.2, 0.05, -0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp_se3(t));
    t(0) += 1e-9;
  }
}
BENCHMARK(BM_ExpSe3);

void BM_Kinematics(benchmark::State& state) {
  const Model m = rod(static_cast<int>(state.range(0)), 16);
  const Eigen::VectorXd q = random_q(m.dof(), 1.0, 1), qd = random_q(m.dof(), 1.0, 2);
  KinematicState st;
  const auto level = static_cast<KinematicsLevel>(state.range(1));
  for (auto _ : state) {
    evaluate_kinematics(m, q, qd, level, st);
    benchmark::DoNotOptimize(st.g.back());
  }
  state.SetLabel(std::to_string(m.dof()) + " dof");
}
BENCHMARK(BM_Kinematics)->ArgsProduct({{2, 10}, {0, 3}})->Unit(benchmark::kMicrosecond);

void BM_Assemble(benchmark::State& state) {
  const Model m = rod(static_cast<int>(state.range(0)), 16);
  const Eigen::VectorXd q = random_q(m.dof(), 1.0, 3), qd = random_q(m.dof(), 1.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(m, q, qd).M(0, 0));
  state.SetLabel(std::to_string(m.dof()) + " dof");
}
BENCHMARK(BM_Assemble)->Arg(2)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_Acceleration(benchmark::State& state) {
  const Model m = rod(static_cast<int>(state.range(0)), 16);
  DynamicsEvaluator eval(m);
  const Eigen::VectorXd q = random_q(m.dof(), 1.0, 5), qd = random_q(m.dof(), 1.0, 6);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, -2.0);
  for (auto _ : state) benchmark::DoNotOptimize(eval.acceleration(q, qd, t)(0));
  state.SetLabel(std::to_string(m.dof()) + " dof");
}
BENCHMARK(BM_Acceleration)->Arg(2)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_Statics(benchmark::State& state) {
  const Model m = rod(static_cast<int>(state.range(0)), 16);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, -5.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_statics(m, t).q(0));
  state.SetLabel(std::to_string(m.dof()) + " dof");
}
BENCHMARK(BM_Statics)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

// rows x snapshots; the smaller side sets the Gram size.
void BM_Pod(benchmark::State& state) {
  SnapshotMatrix s;
  const auto rows = state.range(0), cols = state.range(1);
  s.data = Eigen::MatrixXd::Random(rows, cols);
  for (Eigen::Index i = 0; i < rows / 6; ++i) s.abscissae.push_back(0.25 * static_cast<double>(i) / static_cast<double>(rows / 6));
  for (auto _ : state) benchmark::DoNotOptimize(pod(s).sigma(0));
}
BENCHMARK(BM_Pod)->Args({66, 21})->Args({66, 1331})->Args({240, 64})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gvs

BENCHMARK_MAIN();
