#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "decon/densities.hpp"
#include "decon/rng.hpp"

namespace decon {

/// Correlation matrix R = V V' whose Cholesky rows are written in angular coordinates.
/// Row l (zero-based, l >= 1) is driven by b[l-1] and the l-1 angles starting at
/// offset (l-1)(l-2)/2.
class SphericalCorrelation {
 public:
  explicit SphericalCorrelation(int dim = 1);
  SphericalCorrelation(Eigen::VectorXd b, Eigen::VectorXd theta);

  static int numAngles(int dim) { return (dim - 1) * (dim - 2) / 2; }
  static int angleOffset(int row) { return (row - 1) * (row - 2) / 2; }

  int dim() const { return static_cast<int>(chol_.rows()); }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  const Eigen::MatrixXd& matrix() const { return corr_; }
  const Eigen::MatrixXd& inverse() const { return inv_; }
  double logDet() const { return logDet_; }
  double det() const;

  /// Inverse map: Cholesky of R, then the angular ladder row by row.
  /// Angles land in [-pi/2, pi/2]; rows with b = 0 get zero angles.
  static std::pair<Eigen::VectorXd, Eigen::VectorXd> recoverParams(const Eigen::MatrixXd& R);

 private:
  void build();

  Eigen::VectorXd b_, theta_;
  Eigen::MatrixXd chol_, corr_, inv_;
  double logDet_ = 0.0;
};

/// -0.5 log|R| - 0.5 y'(R^{-1} - I) y for normal scores y.
double copulaLogFactor(const SphericalCorrelation& corr, const Eigen::VectorXd& scores);
/// Multivariate normal log density of scores under N(0, R).
double mvnLogDensity(const SphericalCorrelation& corr, const Eigen::VectorXd& scores);

class GaussianCopula {
 public:
  GaussianCopula(SphericalCorrelation corr, std::vector<std::shared_ptr<const Univariate>> marginals);

  const SphericalCorrelation& correlation() const { return corr_; }
  const Univariate& marginal(int l) const { return *marginals_[l]; }
  int dim() const { return corr_.dim(); }

  /// Log of copula factor times the product of marginal densities.
  double logDensity(const Eigen::VectorXd& x) const;
  /// n x D draws: z = V N(0,I), then each coordinate through its marginal quantile.
  Eigen::MatrixXd sampleJoint(int n, Engine& eng) const;
  /// The latent correlated normal draw used by sampleJoint, for one row.
  Eigen::VectorXd sampleScores(Engine& eng) const;

 private:
  SphericalCorrelation corr_;
  std::vector<std::shared_ptr<const Univariate>> marginals_;
};

}  // namespace decon
