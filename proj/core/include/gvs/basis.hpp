#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "gvs/screw.hpp"

namespace gvs {

// Legendre polynomial of the given order on [0, L] (t = 2x/L - 1).
double legendre_scaled(int order, double x, double length);
// d/dx of legendre_scaled.
double legendre_scaled_derivative(int order, double x, double length);

// Maps an abscissa on [0, L] to the 6 x n matrix whose columns span the strain.
class StrainBasis {
 public:
  virtual ~StrainBasis() = default;
  virtual Mat6X evaluate(double x) const = 0;
  virtual int dof_count() const = 0;
  virtual double length() const = 0;
};

using StrainBasisPtr = std::shared_ptr<const StrainBasis>;

inline int dof_count(const StrainBasis& basis) { return basis.dof_count(); }

// One Legendre column per (row, order) pair; orders[row] = -1 drops the row.
// Columns are ordered row-major: row 0 orders 0..k0, then row 1, ...
class LegendreMonomialBasis final : public StrainBasis {
 public:
  LegendreMonomialBasis(double length, const std::array<int, 6>& orders);

  Mat6X evaluate(double x) const override;
  Mat6X derivative(double x) const;
  int dof_count() const override { return dofs_; }
  double length() const override { return length_; }
  const std::array<int, 6>& orders() const { return orders_; }

 private:
  double length_;
  std::array<int, 6> orders_;
  int dofs_ = 0;
};

// Independent bases on consecutive sections; each section basis is evaluated
// in local coordinates (x - start of section) and occupies its own columns.
class PiecewiseBasis final : public StrainBasis {
 public:
  // breaks: interior section boundaries (ascending), sections.size() == breaks.size() + 1.
  PiecewiseBasis(double length, std::vector<double> breaks, std::vector<StrainBasisPtr> sections);

  Mat6X evaluate(double x) const override;
  int dof_count() const override { return dofs_; }
  double length() const override { return length_; }
  int section_of(double x) const;

 private:
  double length_;
  std::vector<double> starts_;  // section start abscissae
  std::vector<StrainBasisPtr> sections_;
  std::vector<int> offsets_;
  int dofs_ = 0;
};

// Mode table sampled at abscissae, stored block-by-component:
// rows [c * p + i] hold strain component c at abscissa i.
// Evaluation interpolates linearly and clamps outside the sampled range.
class PodBasis final : public StrainBasis {
 public:
  PodBasis(double length, std::vector<double> abscissae, Eigen::MatrixXd modes);

  Mat6X evaluate(double x) const override;
  int dof_count() const override { return static_cast<int>(modes_.cols()); }
  double length() const override { return length_; }
  const std::vector<double>& abscissae() const { return abscissae_; }
  const Eigen::MatrixXd& modes() const { return modes_; }

 private:
  double length_;
  std::vector<double> abscissae_;
  Eigen::MatrixXd modes_;
};

}  // namespace gvs
