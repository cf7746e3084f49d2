#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "decon/density_grid.hpp"
#include "decon/kernels.hpp"
#include "decon/sampler.hpp"
#include "decon/simulate.hpp"

namespace decon {

/// Posterior-mean estimates over a set of draws, reported in raw (unscaled) units.
class PosteriorDensity {
 public:
  explicit PosteriorDensity(const PosteriorDraws& draws);

  int dim() const { return dim_; }
  int q() const { return q_; }
  int drawCount() const { return static_cast<int>(views_.size()); }
  const std::vector<ModelView>& views() const { return views_; }
  const std::vector<double>& scale() const { return scale_; }
  const std::vector<std::string>& names() const { return names_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  double marginal(int l, double xRaw) const;
  double joint(const Eigen::VectorXd& xRaw) const;
  double pair(int a, int b, double xaRaw, double xbRaw) const;
  double consumptionProb(int l, double xRaw) const;

 private:
  int dim_, q_;
  std::vector<ModelView> views_;
  std::vector<double> scale_;
  std::vector<std::string> names_;
  double lower_, upper_;
};

struct GridSpec {
  int points = 201;
  double errorHalfWidth = 6.0;
  int pairPoints = 41;
  bool pairs = true;
};

/// Pointwise posterior means of the intake marginals, bivariate joints, error laws,
/// variance functions and consumption curves, all on the scaled support. Univariate
/// densities are renormalized by the trapezoid rule.
std::vector<DensityGrid> estimateDensities(const PosteriorDraws& draws, const GridSpec& spec, Exec exec);

using PointDensity = std::function<double(const Eigen::VectorXd&)>;

/// Monte Carlo ISE: the mean over evaluation points drawn from the truth of
/// (f - fhat)^2 / f. Throws when the truth vanishes at a point.
double iseEstimate(const PointDensity& truth, const PointDensity& estimate, const Eigen::MatrixXd& points, Exec exec);

struct IseRow {
  std::string target;
  double ise = 0.0;
};
struct IseReport {
  std::string scenario, method;
  long points = 0;
  std::vector<IseRow> rows;  // joint first, then each marginal
};

/// ISE of the joint and of every marginal.
IseReport iseReport(const TruthDensity& truth, const std::function<double(int, double)>& estMarginal,
                    const PointDensity& estJoint, const Eigen::MatrixXd& points,
                    const std::vector<std::string>& names, Exec exec);
void writeIseReport(const IseReport& report, std::ostream& out);

/// Density of Z = X_a / X_b from the joint density of (X_a, X_b):
/// f_Z(z) = int x_b f(z x_b, x_b) dx_b over [bLower, bUpper], truncated where z x_b
/// leaves (-inf, aUpper]. The x_b range is cut wherever either coordinate crosses one of
/// `kinks`, and each piece gets its own tanh-sinh integral.
Eigen::VectorXd energyAdjustedDensity(const std::function<double(double, double)>& joint, const Eigen::VectorXd& zGrid,
                                      double bLower, double bUpper, double aUpper, Exec exec,
                                      const std::vector<double>& kinks = {});

/// Energy-adjusted density grid for component `a` relative to component `b` from a fit,
/// in scaled units (pass through toRawUnits for reporting). Each draw's marginals are
/// tabulated once and the x_b integral uses a fixed composite Simpson rule.
DensityGrid energyAdjustedMarginal(const PosteriorDensity& fit, int a, int b, const Eigen::VectorXd& zGrid, Exec exec);

/// energyAdjustedMarginal on 0 followed by a geometric grid from 1e-4 zStart to zMax, with
/// zMax quadrupled from `zStart` until the grid holds all but 2e-4 of the mass (at most
/// eight widenings).
DensityGrid energyAdjustedCovering(const PosteriorDensity& fit, int a, int b, double zStart, int points, Exec exec);

struct ResidualRow {
  std::string component;
  int occasion = 0;  // pairs occasion j with j + 1 (zero-based)
  long count = 0;
  double r = 0.0, lower = 0.0, upper = 0.0;
};

/// Scaled residuals (W - Xt_hat) / s_hat(Xt_hat) for adjacent occasions and their
/// Pearson correlations with Fisher-z 95% intervals. `data` must be on the fit's scale.
std::vector<ResidualRow> residualDiagnostics(const PosteriorDensity& fit, const RecallDataset& data,
                                             const Eigen::MatrixXd& meanXt);
void writeResidualTable(const std::vector<ResidualRow>& rows, std::ostream& out);

}  // namespace decon
