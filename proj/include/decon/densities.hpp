#pragma once

#include <vector>

#include <Eigen/Core>

#include "decon/rng.hpp"
#include "decon/splines.hpp"

namespace decon {

/// Common surface for every univariate law: density, distribution function, quantile.
class Univariate {
 public:
  virtual ~Univariate() = default;

  virtual double pdf(double x) const = 0;
  virtual double cdf(double x) const = 0;
  virtual double lower() const = 0;
  virtual double upper() const = 0;

  virtual double logPdf(double x) const;
  /// Upper tail probability; overridden where 1 - cdf loses precision.
  virtual double sf(double x) const { return 1.0 - cdf(x); }
  /// Bracketed bisection on the distribution function.
  virtual double quantile(double u) const;
  virtual double sample(Engine& eng) const;

 protected:
  // Finite bracket holding the u-quantile for laws on the whole line.
  virtual void bracket(double u, double& lo, double& hi) const;
};

/// Normal score Phi^{-1}(F(x)), computed from whichever tail is smaller.
/// Throws when x sits where the score is infinite.
double normalScore(const Univariate& dist, double x);
inline constexpr double kScoreLimit = 37.0;
/// Same as normalScore but saturates at +-limit instead of throwing.
double normalScoreClamped(const Univariate& dist, double x, double limit = kScoreLimit);

// Truncated normal kernel helpers.
double truncNormLogPdf(double x, double mean, double var, double lo, double hi);
double truncNormCdf(double x, double mean, double var, double lo, double hi);
double truncNormSf(double x, double mean, double var, double lo, double hi);

class TruncNormMixture : public Univariate {
 public:
  TruncNormMixture(Eigen::VectorXd weights, Eigen::VectorXd means, Eigen::VectorXd vars, double lo, double hi);

  double pdf(double x) const override;
  double cdf(double x) const override;
  double sf(double x) const override;
  double lower() const override { return lo_; }
  double upper() const override { return hi_; }
  double sample(Engine& eng) const override;

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& vars() const { return vars_; }

 private:
  Eigen::VectorXd weights_, means_, vars_, sds_, logMass_;
  double lo_, hi_;
};

/// Density B(x) exp(xi) / sum_m delta_m exp(xi_m) on the basis interval.
class BsplineDensity : public Univariate {
 public:
  BsplineDensity(SplineBasis basis, Eigen::VectorXd logCoef);

  double pdf(double x) const override;
  double cdf(double x) const override;
  double lower() const override { return basis_.lower(); }
  double upper() const override { return basis_.upper(); }

  const SplineBasis& basis() const { return basis_; }
  const Eigen::VectorXd& logCoefficients() const { return logCoef_; }
  double normalizer() const { return normalizer_; }

 private:
  SplineBasis basis_;
  Eigen::VectorXd logCoef_;
  Eigen::VectorXd coef_;  // exp(xi) / normalizer
  double normalizer_;
};

/// Two-component normal kernel whose mean is zero for every parameter value.
class RestrictedErrorKernel : public Univariate {
 public:
  RestrictedErrorKernel(double p, double muTilde, double var1, double var2);

  double p() const { return p_; }
  double muTilde() const { return muTilde_; }
  double var1() const { return var1_; }
  double var2() const { return var2_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double mu1() const { return c1_ * muTilde_; }
  double mu2() const { return c2_ * muTilde_; }
  double variance() const;

  double pdf(double x) const override;
  double logPdf(double x) const override;
  double cdf(double x) const override;
  double sf(double x) const override;
  double lower() const override;
  double upper() const override;
  double sample(Engine& eng) const override;

  /// Density of the kernel's first (t = 0) or second (t = 1) normal piece.
  double componentPdf(int t, double x) const;

 private:
  double p_, muTilde_, var1_, var2_, c1_, c2_;
};

class ErrorMixture : public Univariate {
 public:
  ErrorMixture(Eigen::VectorXd weights, std::vector<RestrictedErrorKernel> kernels);

  double pdf(double x) const override;
  double cdf(double x) const override;
  double sf(double x) const override;
  double lower() const override;
  double upper() const override;
  double sample(Engine& eng) const override;

  double mean() const;
  double variance() const;
  /// The law of eps / scale.
  ErrorMixture rescaled(double scale) const;
  double logPdf(double x) const override;

  const Eigen::VectorXd& weights() const { return weights_; }
  const std::vector<RestrictedErrorKernel>& kernels() const { return kernels_; }

 private:
  Eigen::VectorXd weights_;
  std::vector<RestrictedErrorKernel> kernels_;
};

/// Laplace mixture shifted and scaled to mean 0, variance 1.
class ScaledLaplaceMixture : public Univariate {
 public:
  ScaledLaplaceMixture(Eigen::VectorXd weights, Eigen::VectorXd locations, Eigen::VectorXd scales);

  double pdf(double x) const override;
  double cdf(double x) const override;
  double sf(double x) const override;
  double lower() const override;
  double upper() const override;
  double sample(Engine& eng) const override;

  double rawMean() const { return shift_; }
  double rawSd() const { return scale_; }

 private:
  double rawPdf(double y) const;
  double rawCdf(double y) const;
  double rawSf(double y) const;

  Eigen::VectorXd weights_, locations_, scales_;
  double shift_, scale_;
};

/// Plain N(mean, sd^2), used for pseudo-error marginals and tests.
class NormalLaw : public Univariate {
 public:
  NormalLaw(double mean = 0.0, double sd = 1.0) : mean_(mean), sd_(sd) {}
  double pdf(double x) const override;
  double logPdf(double x) const override;
  double cdf(double x) const override;
  double sf(double x) const override;
  double quantile(double u) const override;
  double lower() const override;
  double upper() const override;

 private:
  double mean_, sd_;
};

}  // namespace decon
