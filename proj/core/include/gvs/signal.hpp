#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace gvs {

// Piecewise-constant tension schedule: values[i] holds on [times[i], times[i+1]).
class ActuationSignal {
 public:
  ActuationSignal() = default;
  ActuationSignal(std::vector<double> times, std::vector<Eigen::VectorXd> values);

  static ActuationSignal constant(const Eigen::VectorXd& value);
  // Zero before `at`, `value` afterwards.
  static ActuationSignal step(const Eigen::VectorXd& value, double at = 0.0);
  // Independent random level per channel drawn uniformly from [low, high];
  // each level is held for a duration drawn uniformly from [hold_min, hold_max].
  // Channels switch at common instants. Deterministic for a given seed.
  static ActuationSignal babbling(int channels, double low, double high, double hold_min, double hold_max,
                                  double horizon, std::uint64_t seed);

  Eigen::VectorXd operator()(double t) const;
  int channels() const { return values_.empty() ? 0 : static_cast<int>(values_.front().size()); }
  const std::vector<double>& switch_times() const { return times_; }
  const std::vector<Eigen::VectorXd>& levels() const { return values_; }

 private:
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
};

}  // namespace gvs
