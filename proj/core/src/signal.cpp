#include "gvs/signal.hpp"

#include <algorithm>
#include <random>

#include "gvs/error.hpp"

namespace gvs {

ActuationSignal::ActuationSignal(std::vector<double> times, std::vector<Eigen::VectorXd> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw InvalidSpec("signal: need one level per switch time");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) throw InvalidSpec("signal: switch times must increase");
    if (values_[i].size() != values_[0].size()) throw DimensionError("signal: channel count varies");
  }
}

ActuationSignal ActuationSignal::constant(const Eigen::VectorXd& value) { return ActuationSignal({0.0}, {value}); }

ActuationSignal ActuationSignal::step(const Eigen::VectorXd& value, double at) {
  if (at <= 0.0) return constant(value);
  return ActuationSignal({0.0, at}, {Eigen::VectorXd::Zero(value.size()), value});
}

ActuationSignal ActuationSignal::babbling(int channels, double low, double high, double hold_min,
                                          double hold_max, double horizon, std::uint64_t seed) {
  if (channels < 1) throw InvalidSpec("babbling: need at least one channel");
  if (!(low <= high)) throw InvalidSpec("babbling: empty amplitude range");
  if (!(hold_min > 0.0 && hold_min <= hold_max)) throw InvalidSpec("babbling: invalid hold interval");
  if (!(horizon > 0.0)) throw InvalidSpec("babbling: horizon must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;
  double t = 0.0;
  while (t < horizon) {
    Eigen::VectorXd v(channels);
    for (int c = 0; c < channels; ++c) v(c) = low + (high - low) * unit(rng);
    times.push_back(t);
    values.push_back(v);
    t += hold_min + (hold_max - hold_min) * unit(rng);
  }
  return ActuationSignal(std::move(times), std::move(values));
}

Eigen::VectorXd ActuationSignal::operator()(double t) const {
  if (values_.empty()) return {};
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return Eigen::VectorXd::Zero(values_.front().size());
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

}  // namespace gvs
