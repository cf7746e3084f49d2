#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "decon/kernels.hpp"
#include "decon/latent_model.hpp"
#include "decon/model.hpp"
#include "decon/rng.hpp"

namespace decon {

struct Hyperparameters {
  double lower = 0.0;
  double upper = 10.0;
  int numBases = 12;
  int kX = 0;    // 0 selects max(5(q+p), 20)
  int kEps = 0;  // 0 selects max(5(q+p), 20)
  double alphaX = 1.0;
  double alphaEps = 1.0;
  double aXi = 10.0, bXi = 1.0;
  double aBeta = 10.0, bBeta = 1.0;
  double aVartheta = 10.0, bVartheta = 1.0;
  double muX0 = 5.0, varX0 = 9.0, aVarX0 = 2.0, bVarX0 = 1.0;
  double varMuTilde = 4.0, aEps = 1.0, bEps = 1.0;
  double muBeta0 = 0.0, varBeta0 = 10.0;
  double initSmoothVar = 0.1;

  double propXi = 0.05;
  double propVartheta = 0.05;
  double propX = 0.25;
  double propMuX = 0.25;
  double propVarX = 0.25;
  double propPEps = 0.1;
  double propMuTilde = 0.25;
  double propVarEps = 0.25;

  int gridSize = 41;
  int iterations = 5000;
  int burnin = 3000;
  int thin = 5;
  int adaptEvery = 50;
  double adaptLow = 0.15, adaptHigh = 0.40;
  int warmupSweeps = 100;

  int resolvedKX(int dim) const { return kX > 0 ? kX : std::max(5 * dim, 20); }
  int resolvedKEps(int dim) const { return kEps > 0 ? kEps : std::max(5 * dim, 20); }
  /// Throws a config error when a field is out of range.
  void validate() const;
};

struct BlockStats {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

/// Everything the chain updates.
struct ChainState {
  ModelParams params;
  Eigen::MatrixXd X;                       // n x (q+p)
  std::vector<Eigen::MatrixXd> W;          // m_i x (2q+p)
  Eigen::MatrixXi labelX;                  // n x p
  std::vector<Eigen::MatrixXi> labelEps;   // m_i x (q+p)
  std::vector<Eigen::MatrixXi> label2Eps;  // m_i x (q+p); 0 picks the first normal piece
  std::vector<double> sig2Xi, sig2Vartheta, sig2Beta;
  Eigen::VectorXi bIdxX, thetaIdxX, bIdxEps, thetaIdxEps;
  std::vector<double> scaleXi, scaleVartheta, scaleX;
  long iteration = 0;
};

struct PosteriorDraws {
  ModelParams shape;  // dimensions and support; values unused
  std::vector<std::string> names;
  std::vector<double> scale;
  int iterations = 0, burnin = 0, thin = 1;
  std::uint64_t seed = 0;
  std::map<std::string, BlockStats> acceptance;
  std::vector<ModelParams> draws;
  /// Posterior means over the retained snapshots, per subject: X and the amount-scale
  /// X-tilde coordinates (X / P(X) for episodic components).
  std::vector<long> subjectIds;
  Eigen::MatrixXd meanX, meanXt;
};

/// Closed-form full conditionals, exposed so they can be checked in isolation.
namespace conditional {

/// Dir(counts + alpha/K) for K = counts.size().
Eigen::VectorXd mixtureWeights(Engine& eng, const Eigen::VectorXi& counts, double alpha);
/// Label drawn with probability proportional to exp(logTerms[k]).
int label(Engine& eng, const Eigen::VectorXd& logTerms);
/// IG{a + (J+2)/2, b + c'Pc/2}.
double smoothingVariance(Engine& eng, const Eigen::VectorXd& coef, const Eigen::MatrixXd& penalty, double a,
                         double b);

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
};
/// Normal full conditional of probit-curve coefficients given intakes x_i, replicate
/// counts m_i and per-subject sums of pseudo-surrogates.
Gaussian curveCoefficients(const SplineBasis& basis, const Eigen::VectorXd& x, const Eigen::VectorXi& reps,
                           const Eigen::VectorXd& wSums, const Eigen::MatrixXd& penalty, double sig2, double mu0,
                           double var0);
Eigen::VectorXd drawGaussian(Engine& eng, const Gaussian& g);
/// Pseudo-surrogate given h(X) and the consumption indicator.
double pseudoSurrogate(Engine& eng, double h, bool consumed);

}  // namespace conditional

/// Values on the discretized copula grids.
double gridB(int index, int gridSize);
double gridTheta(int index, int gridSize);

class Sampler {
 public:
  /// `data` must already be scaled into the model's support.
  Sampler(const RecallDataset& data, Hyperparameters hp, std::uint64_t seed, Exec exec = Exec::Parallel);

  void initialize();
  void sweep();
  PosteriorDraws run(const std::function<void(long)>& progress = {});

  const ChainState& state() const { return st_; }
  ChainState& mutableState() { return st_; }
  const std::map<std::string, BlockStats>& acceptance() const { return stats_; }
  const RecallDataset& data() const { return data_; }
  const Hyperparameters& hyper() const { return hp_; }

  // Individual steps in sweep order.
  void updateEpisodicDensities();
  void updateRegularMixture();
  void updateErrorMixture();
  void updateVarianceFunctions();
  void imputeSurrogates();
  void updateCurves();
  void updateIntakes();
  void updateCopulas();

  /// Log of the subject-level full conditional of X_i (up to a constant).
  double subjectLogTarget(int i, const Eigen::VectorXd& x) const;

 private:
  Engine globalEngine(int step) const;
  Engine subjectEngine(int step, int subject) const;
  void refreshDerived();
  void adapt();
  void record(const std::string& block, long proposed, long accepted);

  void initDensityCoefficients(int l);
  void initCurve(int l);
  void initVarianceFunction(int c);
  void initRegularAtoms();

  RecallDataset data_;
  Hyperparameters hp_;
  std::uint64_t seed_;
  Exec exec_;
  SplineBasis basis_;
  Eigen::MatrixXd penalty_;
  ChainState st_;
  std::uint64_t streamKey_ = 0;

  // Derived from the current state; refreshed by refreshDerived().
  Eigen::MatrixXd xt_;  // n x (2q+p)
  Eigen::MatrixXd sd_;  // n x (q+p)

  std::map<std::string, BlockStats> stats_;
  std::map<std::string, BlockStats> window_;
};

}  // namespace decon
