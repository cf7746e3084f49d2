#pragma once

#include <cmath>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "decon/copula.hpp"
#include "decon/densities.hpp"
#include "decon/splines.hpp"

namespace decon {

/// Probability floor used when dividing by P(X).
inline constexpr double kProbFloor = 1e-8;

/// Replicate recalls. Components are ordered episodic first (q), then regular (p).
/// Each subject holds an m_i x (q+p) matrix of amounts; zeros mark non-consumption.
struct RecallDataset {
  int q = 0;
  int p = 0;
  std::vector<std::string> names;
  std::vector<long> subjectIds;
  std::vector<Eigen::MatrixXd> amounts;
  /// Multiplier applied to raw amounts per component (1 when unscaled).
  std::vector<double> scale;

  int numComponents() const { return q + p; }
  int numSubjects() const { return static_cast<int>(amounts.size()); }
  int numOccasions(int i) const { return static_cast<int>(amounts[i].rows()); }
  int totalOccasions() const;
  /// Derived consumption indicator for episodic component l on occasion (i, j).
  bool consumed(int i, int j, int l) const { return amounts[i](j, l) > 0.0; }

  /// Throws a data error describing the first violated invariant.
  void validate() const;
};

/// Rescales each component so its largest amount equals `target`; zeros stay zero.
RecallDataset scaleRecalls(const RecallDataset& raw, double target = 20.0);

RecallDataset readRecallsCsv(const std::string& path, const std::vector<std::string>& episodicNames);
void writeRecallsCsv(const RecallDataset& data, std::ostream& out);

/// s^2(x) = B(x) exp(vartheta), with x clamped into the basis interval.
class VarianceFunction {
 public:
  VarianceFunction(SplineBasis basis, Eigen::VectorXd logCoef);
  double variance(double x) const;
  double sd(double x) const { return std::sqrt(variance(x)); }
  const Eigen::VectorXd& logCoefficients() const { return logCoef_; }

 private:
  SplineBasis basis_;
  Eigen::VectorXd logCoef_, coef_;
};

/// P(x) = Phi(h(x)) with h(x) = B(x) beta.
class ConsumptionCurve {
 public:
  ConsumptionCurve(SplineBasis basis, Eigen::VectorXd coef);
  double h(double x) const;
  double prob(double x) const;
  const Eigen::VectorXd& coefficients() const { return coef_; }

 private:
  SplineBasis basis_;
  Eigen::VectorXd coef_;
};

/// Maps X (length q+p) to X-tilde (length 2q+p): h_l(X_l), X_l / P_l(X_l), regular X.
/// P is floored at kProbFloor.
Eigen::VectorXd transformIntake(const Eigen::VectorXd& x, const std::vector<ConsumptionCurve>& curves);

/// Mean of surrogate coordinate l given X (which equals X-tilde_l). Throws when P = 0.
double surrogateMean(const Eigen::VectorXd& x, const std::vector<ConsumptionCurve>& curves, int l);

/// Error law of one occasion: standard normal pseudo-errors for the first q coordinates,
/// heteroscedastic copula-linked amount errors for the remaining q+p.
struct ErrorLaw {
  int q = 0;
  std::vector<std::shared_ptr<const Univariate>> marginals;  // q+p scaled-error laws
  std::vector<VarianceFunction> variance;                     // q+p
  SphericalCorrelation corr;                                  // dimension q+p
};

/// log f(W | X-tilde) for one occasion, including the -log s Jacobian terms.
double logLikOccasion(const Eigen::VectorXd& w, const Eigen::VectorXd& xt, const ErrorLaw& law);

}  // namespace decon
