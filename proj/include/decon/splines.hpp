#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace decon {

/// Quadratic B-splines on [A,B] with equidistant interior knots.
class SplineBasis {
 public:
  /// The (at most) three nonzero basis values at one point, starting at index `first`.
  struct Local {
    int first = 0;
    std::array<double, 3> value{};
  };

  SplineBasis() = default;
  SplineBasis(double lower, double upper, int numBases);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double delta() const { return delta_; }
  int size() const { return numBases_; }
  int numIntervals() const { return numBases_ - 2; }
  const std::vector<double>& knots() const { return knots_; }
  /// Integral of each basis function over [A,B].
  const Eigen::VectorXd& areas() const { return areas_; }

  Local local(double x) const;
  Eigen::VectorXd eval(double x) const;
  /// Row vector B(x) times coefficients, using only the nonzero entries.
  double combine(double x, const Eigen::VectorXd& coef) const;
  /// Integrals of every basis function from A to x.
  Eigen::VectorXd integralTo(double x) const;
  /// Design matrix with one row per point.
  Eigen::MatrixXd design(const Eigen::VectorXd& points) const;

  bool contains(double x) const { return x >= lower_ && x <= upper_; }

 private:
  double lower_ = 0.0;
  double upper_ = 1.0;
  double delta_ = 1.0;
  int numBases_ = 0;
  std::vector<double> knots_;
  Eigen::VectorXd areas_;
};

/// (J-2) x J second-order difference operator.
Eigen::MatrixXd secondDifference(int numBases);
/// D'D for the second-difference operator D.
Eigen::MatrixXd makePenalty(int numBases);

}  // namespace decon
