#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "decon/copula.hpp"
#include "decon/densities.hpp"
#include "decon/latent_model.hpp"
#include "decon/splines.hpp"

namespace decon {

/// Every parameter needed to evaluate the fitted densities and curves at one draw.
/// Amount coordinate c (0 <= c < q+p) belongs to component c.
struct ModelParams {
  int q = 0;
  int p = 0;
  double lower = 0.0;
  double upper = 10.0;
  int numBases = 12;

  std::vector<Eigen::VectorXd> xi;        // q episodic density coefficients
  Eigen::MatrixXd piX;                    // p x K_X
  Eigen::VectorXd muX, varX;              // K_X shared atoms
  Eigen::MatrixXd piEps;                  // (q+p) x K_eps
  Eigen::VectorXd pEps, muTildeEps, var1Eps, var2Eps;  // K_eps shared atoms
  std::vector<Eigen::VectorXd> vartheta;  // q+p variance-function coefficients
  std::vector<Eigen::VectorXd> beta;      // q consumption-curve coefficients
  Eigen::VectorXd bX, thetaX, bEps, thetaEps;

  int dim() const { return q + p; }
  int numAtomsX() const { return static_cast<int>(muX.size()); }
  int numAtomsEps() const { return static_cast<int>(pEps.size()); }
  SplineBasis basis() const { return SplineBasis(lower, upper, numBases); }

  /// Flat (name, value) listing in a fixed order, used by the draw files.
  std::vector<std::pair<std::string, double>> flatten() const;
  /// Inverse of flatten given the shape fields (q, p, J, interval, atom counts).
  void unflatten(const std::vector<double>& values);
  /// Resizes every container for the given shape, zero-filled.
  void allocate(int q, int p, int numBases, int kX, int kEps);
};

/// Distribution objects built from one parameter draw.
class ModelView {
 public:
  explicit ModelView(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  int q() const { return params_.q; }
  int dim() const { return params_.dim(); }

  const Univariate& marginalX(int l) const { return *marginalX_[l]; }
  std::shared_ptr<const Univariate> marginalXPtr(int l) const { return marginalX_[l]; }
  const ErrorMixture& errorLaw(int c) const { return *errors_[c]; }
  const VarianceFunction& variance(int c) const { return variance_[c]; }
  const ConsumptionCurve& curve(int l) const { return curves_[l]; }
  const std::vector<ConsumptionCurve>& curves() const { return curves_; }
  const SphericalCorrelation& corrX() const { return corrX_; }
  const SphericalCorrelation& corrEps() const { return corrEps_; }
  const ErrorLaw& occasionLaw() const { return law_; }

  /// Joint density of X (copula factor times marginals); 0 outside the support.
  double jointDensity(const Eigen::VectorXd& x) const;
  /// Bivariate density of (X_a, X_b) from the implied two-dimensional copula.
  double pairDensity(int a, int b, double xa, double xb) const;

 private:
  ModelParams params_;
  std::vector<std::shared_ptr<const Univariate>> marginalX_;
  std::vector<std::shared_ptr<const ErrorMixture>> errors_;
  std::vector<VarianceFunction> variance_;
  std::vector<ConsumptionCurve> curves_;
  SphericalCorrelation corrX_, corrEps_;
  ErrorLaw law_;
};

}  // namespace decon
