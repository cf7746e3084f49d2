#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "decon/kernels.hpp"
#include "decon/latent_model.hpp"

namespace decon {

/// Fourth-order Taylor polynomial of log about 1.
double newlog(double x);

enum class ScenarioKind { Main, Lognormal };

/// Generator settings. Truth parameters are filled by mainScenario / lognormalScenario
/// and may be overridden field by field.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Main;
  int q = 2, p = 1;
  int n = 1000, m = 3;
  std::uint64_t seed = 1;

  // Copula mixture design.
  Eigen::MatrixXd muX;    // (q+p) x K atom means, row per component
  Eigen::VectorXd piX;    // K weights shared by every component
  double varX = 0.5625;
  double lower = 0.0, upper = 6.0;
  Eigen::MatrixXd corrX, corrEps;
  Eigen::VectorXd gamma0;  // q intercepts of the probit surrogate
  double gamma1 = 1.0;
  double scaleDivisor = 3.0;  // s(x) = x / scaleDivisor

  // Log-normal design.
  Eigen::VectorXd muTr, varTr;  // 2q+p
  Eigen::MatrixXd corrTr;
  Eigen::VectorXd varU;  // 2q+p
  Eigen::MatrixXd corrU;
  int isSamples = 100000;

  int dim() const { return q + p; }
  /// Throws a config error on inconsistent shapes or invalid correlations.
  void validate() const;
};

/// AR(1)-type correlation matrix with entries rho^|i-j|.
Eigen::MatrixXd powerCorrelation(int dim, double rho);

ScenarioSpec mainScenario(int q, int p);
ScenarioSpec lognormalScenario(int q, int p);

/// Scaled error law of amount component c in the copula mixture design (variance 1).
std::shared_ptr<const Univariate> mainErrorLaw(int c);

struct TruthEstimate {
  double value = 0.0;
  double se = 0.0;     // Monte Carlo standard error; 0 for closed forms
  double ess = 0.0;    // effective sample size of the importance weights
  bool degenerate = false;
};

/// True density of the latent intakes, evaluable on any subset of components.
class TruthDensity {
 public:
  virtual ~TruthDensity() = default;
  virtual int dim() const = 0;
  virtual int q() const = 0;
  /// Support of component l (upper may be +inf).
  virtual double lower(int l) const = 0;
  virtual double upper(int l) const = 0;
  /// Density of the components listed in `comps` at `x` (same length).
  virtual TruthEstimate subset(const std::vector<int>& comps, const Eigen::VectorXd& x) const = 0;
  /// True P(consumption | X_l = x); NaN when the design does not define it through X.
  virtual double consumptionProb(int l, double x) const;

  TruthEstimate marginal(int l, double x) const;
  TruthEstimate joint(const Eigen::VectorXd& x) const;
};

class MainTruth : public TruthDensity {
 public:
  explicit MainTruth(const ScenarioSpec& spec);
  int dim() const override { return spec_.dim(); }
  int q() const override { return spec_.q; }
  double lower(int) const override { return spec_.lower; }
  double upper(int) const override { return spec_.upper; }
  TruthEstimate subset(const std::vector<int>& comps, const Eigen::VectorXd& x) const override;
  double consumptionProb(int l, double x) const override;
  const Univariate& marginalLaw(int l) const { return *marginals_[l]; }
  std::shared_ptr<const Univariate> marginalPtr(int l) const { return marginals_[l]; }

 private:
  ScenarioSpec spec_;
  std::vector<std::shared_ptr<const Univariate>> marginals_;
};

/// Truth of the log-normal design. Episodic marginals and every joint are integrals over
/// the probit coordinates, estimated by importance sampling from their exact normal law.
class LognormalTruth : public TruthDensity {
 public:
  explicit LognormalTruth(const ScenarioSpec& spec);
  int dim() const override { return spec_.dim(); }
  int q() const override { return spec_.q; }
  double lower(int) const override { return 0.0; }
  double upper(int) const override;
  /// Closed form for a single regular component, importance sampling otherwise.
  TruthEstimate subset(const std::vector<int>& comps, const Eigen::VectorXd& x) const override;
  /// Importance-sampling estimate for any subset, regular-only subsets included.
  TruthEstimate importance(const std::vector<int>& comps, const Eigen::VectorXd& x) const;
  /// Exact lognormal density of regular component l (l >= q).
  double regularDensity(int l, double x) const;

 private:
  ScenarioSpec spec_;
  Eigen::MatrixXd cov_;    // 2q+p covariance of the transformed intakes
  Eigen::MatrixXd probit_;  // isSamples x q draws of the probit coordinates
};

std::shared_ptr<const TruthDensity> makeTruth(const ScenarioSpec& spec);

struct GroundTruth {
  ScenarioSpec spec;
  RecallDataset data;            // raw recalls, unscaled
  Eigen::MatrixXd X;             // n x (q+p) true intakes
  Eigen::MatrixXd prob;          // n x q true consumption probabilities
  std::vector<Eigen::MatrixXd> W;  // m x (2q+p) latent surrogates
  std::vector<Eigen::MatrixXd> U;  // m x (2q+p) measurement errors
  std::shared_ptr<const TruthDensity> truth;
};

GroundTruth generateMain(const ScenarioSpec& spec, Exec exec = Exec::Parallel);
GroundTruth generateLognormal(const ScenarioSpec& spec, Exec exec = Exec::Parallel);
GroundTruth generate(const ScenarioSpec& spec, Exec exec = Exec::Parallel);

std::string scenarioToJson(const ScenarioSpec& spec);
/// Starts from the design defaults for (kind, q, p) and applies every field present.
ScenarioSpec scenarioFromJson(const std::string& text);

/// Sidecar layout: `# decon-truth v1`, `# scenario {json}`, then `subject,<names>` rows.
void writeTruthSidecar(const GroundTruth& gt, std::ostream& out);
struct TruthSidecar {
  ScenarioSpec spec;
  std::vector<std::string> names;
  std::vector<long> subjectIds;
  Eigen::MatrixXd X;
};
TruthSidecar readTruthSidecar(const std::string& path);

}  // namespace decon
