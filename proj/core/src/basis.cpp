#include "gvs/basis.hpp"

#include <algorithm>
#include <cmath>

#include "gvs/error.hpp"

namespace gvs {

namespace {

// P_n(t) and P_n'(t) by the three-term recurrence.
std::pair<double, double> legendre(int order, double t) {
  if (order < 0) throw InvalidSpec("legendre: negative order");
  double p0 = 1.0, d0 = 0.0;
  if (order == 0) return {p0, d0};
  double p1 = t, d1 = 1.0;
  for (int k = 2; k <= order; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    const double d2 = d0 + (2.0 * k - 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

}  // namespace

double legendre_scaled(int order, double x, double length) {
  return legendre(order, 2.0 * x / length - 1.0).first;
}

double legendre_scaled_derivative(int order, double x, double length) {
  return legendre(order, 2.0 * x / length - 1.0).second * 2.0 / length;
}

LegendreMonomialBasis::LegendreMonomialBasis(double length, const std::array<int, 6>& orders)
    : length_(length), orders_(orders) {
  if (!(length > 0.0)) throw InvalidSpec("legendre basis: length must be positive");
  for (int k : orders) {
    if (k < -1) throw InvalidSpec("legendre basis: order must be >= -1");
    dofs_ += k + 1;
  }
  if (dofs_ < 1) throw InvalidSpec("legendre basis: no columns");
}

Mat6X LegendreMonomialBasis::evaluate(double x) const {
  Mat6X phi = Mat6X::Zero(6, dofs_);
  const double t = 2.0 * x / length_ - 1.0;
  int col = 0;
  for (int row = 0; row < 6; ++row) {
    for (int k = 0; k <= orders_[row]; ++k) phi(row, col++) = legendre(k, t).first;
  }
  return phi;
}

Mat6X LegendreMonomialBasis::derivative(double x) const {
  Mat6X phi = Mat6X::Zero(6, dofs_);
  const double t = 2.0 * x / length_ - 1.0;
  int col = 0;
  for (int row = 0; row < 6; ++row) {
    for (int k = 0; k <= orders_[row]; ++k) phi(row, col++) = legendre(k, t).second * 2.0 / length_;
  }
  return phi;
}

PiecewiseBasis::PiecewiseBasis(double length, std::vector<double> breaks,
                               std::vector<StrainBasisPtr> sections)
    : length_(length), sections_(std::move(sections)) {
  if (sections_.size() != breaks.size() + 1)
    throw InvalidSpec("piecewise basis: need one section per interval");
  starts_.push_back(0.0);
  for (double b : breaks) {
    if (!(b > starts_.back() && b < length)) throw InvalidSpec("piecewise basis: breaks must increase inside (0, L)");
    starts_.push_back(b);
  }
  for (const auto& s : sections_) {
    if (!s) throw InvalidSpec("piecewise basis: null section basis");
    offsets_.push_back(dofs_);
    dofs_ += s->dof_count();
  }
}

int PiecewiseBasis::section_of(double x) const {
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
  return std::max(0, static_cast<int>(it - starts_.begin()) - 1);
}

Mat6X PiecewiseBasis::evaluate(double x) const {
  Mat6X phi = Mat6X::Zero(6, dofs_);
  const int s = section_of(x);
  const auto& inner = *sections_[s];
  phi.middleCols(offsets_[s], inner.dof_count()) = inner.evaluate(x - starts_[s]);
  return phi;
}

PodBasis::PodBasis(double length, std::vector<double> abscissae, Eigen::MatrixXd modes)
    : length_(length), abscissae_(std::move(abscissae)), modes_(std::move(modes)) {
  const auto p = static_cast<Eigen::Index>(abscissae_.size());
  if (p < 1) throw InvalidSpec("pod basis: no sample abscissae");
  if (modes_.rows() != 6 * p) throw DimensionError("pod basis: mode table must have 6p rows");
  if (modes_.cols() < 1) throw InvalidSpec("pod basis: no modes");
  if (!std::is_sorted(abscissae_.begin(), abscissae_.end()) ||
      std::adjacent_find(abscissae_.begin(), abscissae_.end()) != abscissae_.end())
    throw InvalidSpec("pod basis: abscissae must be strictly increasing");
}

Mat6X PodBasis::evaluate(double x) const {
  const auto p = static_cast<Eigen::Index>(abscissae_.size());
  Eigen::Index i0 = 0, i1 = 0;
  double a = 0.0;
  if (p > 1 && x > abscissae_.front()) {
    if (x >= abscissae_.back()) {
      i0 = i1 = p - 1;
    } else {
      const auto it = std::upper_bound(abscissae_.begin(), abscissae_.end(), x);
      i1 = it - abscissae_.begin();
      i0 = i1 - 1;
      a = (x - abscissae_[i0]) / (abscissae_[i1] - abscissae_[i0]);
    }
  }
  Mat6X phi(6, modes_.cols());
  for (int c = 0; c < 6; ++c) {
    phi.row(c) = (1.0 - a) * modes_.row(c * p + i0) + a * modes_.row(c * p + i1);
  }
  return phi;
}

}  // namespace gvs
