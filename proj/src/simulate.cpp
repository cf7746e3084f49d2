#include "decon/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "decon/copula.hpp"
#include "decon/densities.hpp"
#include "decon/error.hpp"
#include "decon/normal.hpp"
#include "decon/rng.hpp"

namespace decon {

double newlog(double x) {
  const double t = x - 1.0;
  return t - t * t / 2.0 + t * t * t / 3.0 - t * t * t * t / 4.0;
}

Eigen::MatrixXd powerCorrelation(int dim, double rho) {
  Eigen::MatrixXd r(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) r(a, b) = std::pow(rho, std::abs(a - b));
  return r;
}

namespace {

std::string componentName(int c, int q) {
  return c < q ? "episodic_" + std::to_string(c + 1) : "regular_" + std::to_string(c - q + 1);
}

void checkCorrelation(const Eigen::MatrixXd& r, int dim, const char* what) {
  if (r.rows() != dim || r.cols() != dim)
    throw configError(std::string("scenario.") + what + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
  if (!r.isApprox(r.transpose(), 1e-12) || (r.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
    throw configError(std::string("scenario.") + what + " must be symmetric with a unit diagonal");
  if (Eigen::LLT<Eigen::MatrixXd>(r).info() != Eigen::Success)
    throw configError(std::string("scenario.") + what + " is not positive definite");
}

Eigen::MatrixXd covariance(const Eigen::VectorXd& var, const Eigen::MatrixXd& corr) {
  const Eigen::VectorXd sd = var.array().sqrt();
  return sd.asDiagonal() * corr * sd.asDiagonal();
}

Eigen::VectorXd correlatedNormal(Engine& eng, const Eigen::MatrixXd& chol) {
  Eigen::VectorXd z(chol.rows());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = draw::standardNormal(eng);
  return chol * z;
}

// Quantile of a normal score, taken from the upper tail when that is more precise.
double fromScore(const Univariate& law, double z) {
  return law.quantile(z > 0.0 ? 1.0 - normal::sf(z) : normal::cdf(z));
}

constexpr std::uint64_t kStepIntake = 1, kStepOccasion = 2, kStepProbit = 3;

RecallDataset emptyDataset(const ScenarioSpec& spec) {
  RecallDataset d;
  d.q = spec.q;
  d.p = spec.p;
  for (int c = 0; c < spec.dim(); ++c) d.names.push_back(componentName(c, spec.q));
  d.scale.assign(spec.dim(), 1.0);
  d.amounts.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) d.subjectIds.push_back(i + 1);
  return d;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (q < 0 || p < 0 || q + p < 1) throw configError("scenario: need q + p >= 1");
  if (n < 1 || m < 1) throw configError("scenario: n and m must be positive");
  const int d = dim();
  if (kind == ScenarioKind::Main) {
    if (d > 3) throw configError("scenario: the copula mixture design has three error laws, so q + p <= 3");
    if (muX.rows() != d || muX.cols() != piX.size()) throw configError("scenario.mu_x must be (q+p) x K with K = len(pi_x)");
    if ((piX.array() < 0.0).any() || std::abs(piX.sum() - 1.0) > 1e-12) throw configError("scenario.pi_x must be a probability vector");
    if (!(varX > 0.0)) throw configError("scenario.var_x must be positive");
    if (!(upper > lower)) throw configError("scenario: upper must exceed lower");
    if (lower < 0.0) throw configError("scenario: intakes must be nonnegative");
    if (gamma0.size() != q) throw configError("scenario.gamma0 needs q entries");
    if (!(scaleDivisor > 0.0)) throw configError("scenario.scale_divisor must be positive");
    checkCorrelation(corrX, d, "corr_x");
    checkCorrelation(corrEps, d, "corr_eps");
  } else {
    const int t = 2 * q + p;
    if (muTr.size() != t || varTr.size() != t || varU.size() != t)
      throw configError("scenario: mu_tr, var_tr and var_u need 2q+p entries");
    if ((varTr.array() <= 0.0).any() || (varU.array() <= 0.0).any())
      throw configError("scenario: var_tr and var_u must be positive");
    checkCorrelation(corrTr, t, "corr_tr");
    checkCorrelation(corrU, t, "corr_u");
    if (isSamples < 100) throw configError("scenario.is_samples must be at least 100");
  }
}

ScenarioSpec mainScenario(int q, int p) {
  ScenarioSpec s;
  s.kind = ScenarioKind::Main;
  s.q = q;
  s.p = p;
  const int d = q + p;
  if (d < 1 || d > 3) throw configError("scenario: the copula mixture design supports 1 to 3 components");
  Eigen::MatrixXd mu(3, 3);
  mu << -0.5, 0.75, 2.0, 0.0, 3.0, 0.0, 2.0, 2.0, 2.0;
  s.muX = mu.topRows(d);
  s.piX = Eigen::Vector3d(0.25, 0.5, 0.25);
  s.varX = 0.75 * 0.75;
  s.corrX = powerCorrelation(d, 0.7);
  s.corrEps = powerCorrelation(d, 0.5);
  s.gamma0 = Eigen::VectorXd::Ones(q);
  if (q > 0) s.gamma0[0] = 1.5;
  return s;
}

ScenarioSpec lognormalScenario(int q, int p) {
  ScenarioSpec s;
  s.kind = ScenarioKind::Lognormal;
  s.q = q;
  s.p = p;
  const int t = 2 * q + p;
  if (q == 2 && p == 1) {
    s.muTr.resize(5);
    s.muTr << 0.75, 1.0, 0.15, 0.15, 1.0;
    s.varTr.resize(5);
    s.varTr << 0.25, 0.15, 0.25, 0.25, 0.05;
  } else {
    s.muTr = Eigen::VectorXd::Zero(t);
    s.varTr = Eigen::VectorXd::Constant(t, 0.25);
  }
  s.corrTr = powerCorrelation(t, 0.7);
  s.varU = Eigen::VectorXd::Constant(t, 0.125);
  s.varU.head(q).setOnes();
  s.corrU = powerCorrelation(t, 0.5);
  return s;
}

std::shared_ptr<const Univariate> mainErrorLaw(int c) {
  const Eigen::Vector3d w(0.25, 0.5, 0.25);
  auto standardized = [&](std::vector<RestrictedErrorKernel> kernels) {
    const ErrorMixture raw(w, std::move(kernels));
    return std::make_shared<const ErrorMixture>(raw.rescaled(std::sqrt(raw.variance())));
  };
  switch (c) {
    case 0:
      return standardized({RestrictedErrorKernel(0.4, 2, 2, 1), RestrictedErrorKernel(0.4, 2, 2, 1),
                           RestrictedErrorKernel(0.4, 2, 2, 1)});
    case 1:
      return standardized({RestrictedErrorKernel(0.5, 0, 0.25, 0.25), RestrictedErrorKernel(0.5, 0, 0.25, 0.25),
                           RestrictedErrorKernel(0.5, 0, 5, 5)});
    case 2:
      return std::make_shared<const ScaledLaplaceMixture>(w, Eigen::Vector3d::Zero(), Eigen::Vector3d::Constant(2.0));
    default:
      throw argumentError("mainErrorLaw: component index must be 0, 1 or 2");
  }
}

// ------------------------------------------------------------------ truth densities

double TruthDensity::consumptionProb(int, double) const { return std::numeric_limits<double>::quiet_NaN(); }

TruthEstimate TruthDensity::marginal(int l, double x) const { return subset({l}, Eigen::VectorXd::Constant(1, x)); }

TruthEstimate TruthDensity::joint(const Eigen::VectorXd& x) const {
  std::vector<int> all(dim());
  for (int c = 0; c < dim(); ++c) all[c] = c;
  return subset(all, x);
}

MainTruth::MainTruth(const ScenarioSpec& spec) : spec_(spec) {
  spec_.validate();
  const Eigen::VectorXd vars = Eigen::VectorXd::Constant(spec_.piX.size(), spec_.varX);
  for (int c = 0; c < spec_.dim(); ++c)
    marginals_.push_back(std::make_shared<const TruncNormMixture>(spec_.piX, spec_.muX.row(c).transpose(), vars,
                                                                  spec_.lower, spec_.upper));
}

TruthEstimate MainTruth::subset(const std::vector<int>& comps, const Eigen::VectorXd& x) const {
  const int k = static_cast<int>(comps.size());
  for (int a = 0; a < k; ++a)
    if (x[a] < spec_.lower || x[a] > spec_.upper) return {};
  if (k == 1) return {marginals_[comps[0]]->pdf(x[0])};
  for (int a = 0; a < k; ++a)
    if (x[a] <= spec_.lower || x[a] >= spec_.upper) return {};
  Eigen::MatrixXd r(k, k);
  std::vector<std::shared_ptr<const Univariate>> laws;
  for (int a = 0; a < k; ++a) {
    laws.push_back(marginals_[comps[a]]);
    for (int b = 0; b < k; ++b) r(a, b) = spec_.corrX(comps[a], comps[b]);
  }
  const auto [b, theta] = SphericalCorrelation::recoverParams(r);
  const GaussianCopula cop(SphericalCorrelation(b, theta), laws);
  return {std::exp(cop.logDensity(x))};
}

double MainTruth::consumptionProb(int l, double x) const {
  if (l < 0 || l >= spec_.q) throw argumentError("consumptionProb: component is not episodic");
  return normal::cdf(spec_.gamma0[l] + spec_.gamma1 * newlog(x));
}

LognormalTruth::LognormalTruth(const ScenarioSpec& spec) : spec_(spec) {
  spec_.validate();
  cov_ = covariance(spec_.varTr, spec_.corrTr);
  const int q = spec_.q;
  probit_.resize(spec_.isSamples, q);
  if (q == 0) return;
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(cov_.topLeftCorner(q, q)).matrixL();
  Engine eng = substream(spec_.seed, 0, kStepProbit, 0);
  for (int s = 0; s < spec_.isSamples; ++s)
    probit_.row(s) = (spec_.muTr.head(q) + correlatedNormal(eng, chol)).transpose();
}

double LognormalTruth::upper(int) const { return std::numeric_limits<double>::infinity(); }

double LognormalTruth::regularDensity(int l, double x) const {
  if (l < spec_.q || l >= spec_.dim()) throw argumentError("regularDensity: component is not regular");
  if (!(x > 0.0)) return 0.0;
  const int k = spec_.q + l;
  return normal::density(std::log(x), spec_.muTr[k], cov_(k, k)) / x;
}

TruthEstimate LognormalTruth::subset(const std::vector<int>& comps, const Eigen::VectorXd& x) const {
  if (comps.size() == 1 && comps[0] >= spec_.q) return {regularDensity(comps[0], x[0]), 0.0, 0.0, false};
  return importance(comps, x);
}

TruthEstimate LognormalTruth::importance(const std::vector<int>& comps, const Eigen::VectorXd& x) const {
  const int q = spec_.q, k = static_cast<int>(comps.size());
  for (int a = 0; a < k; ++a)
    if (!(x[a] > 0.0)) return {};
  std::vector<int> obs(k);
  for (int a = 0; a < k; ++a) obs[a] = q + comps[a];
  Eigen::MatrixXd sOO(k, k), sOZ(k, q);
  Eigen::VectorXd muO(k);
  for (int a = 0; a < k; ++a) {
    muO[a] = spec_.muTr[obs[a]];
    for (int b = 0; b < k; ++b) sOO(a, b) = cov_(obs[a], obs[b]);
    for (int z = 0; z < q; ++z) sOZ(a, z) = cov_(obs[a], z);
  }
  double logJac = 0.0;
  for (int a = 0; a < k; ++a) logJac -= std::log(x[a]);

  if (q == 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(sOO);
    Eigen::VectorXd r(k);
    for (int a = 0; a < k; ++a) r[a] = std::log(x[a]) - muO[a];
    const Eigen::VectorXd v = llt.matrixL().solve(r);
    const double logDet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return {std::exp(-0.5 * v.squaredNorm() - 0.5 * logDet - k * normal::kLogSqrt2Pi + logJac), 0.0, 0.0, false};
  }

  const Eigen::MatrixXd sZZ = cov_.topLeftCorner(q, q);
  const Eigen::MatrixXd gain = sZZ.llt().solve(sOZ.transpose()).transpose();  // k x q
  const Eigen::MatrixXd condCov = sOO - gain * sOZ.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(condCov);
  if (llt.info() != Eigen::Success) throw numericalError("importance sampling: conditional covariance is singular");
  const Eigen::MatrixXd lower = llt.matrixL();
  const double logDet = 2.0 * lower.diagonal().array().log().sum();
  const double logConst = -0.5 * logDet - k * normal::kLogSqrt2Pi + logJac;
  const Eigen::VectorXd muZ = spec_.muTr.head(q);

  const int M = static_cast<int>(probit_.rows());
  double sum = 0.0, sumSq = 0.0;
  Eigen::VectorXd r(k);
  for (int s = 0; s < M; ++s) {
    const Eigen::VectorXd z = probit_.row(s).transpose();
    const Eigen::VectorXd mean = muO + gain * (z - muZ);
    for (int a = 0; a < k; ++a) {
      r[a] = std::log(x[a]) - mean[a];
      if (comps[a] < q) r[a] -= normal::logCdf(z[comps[a]]);
    }
    const double w = std::exp(logConst - 0.5 * lower.triangularView<Eigen::Lower>().solve(r).squaredNorm());
    sum += w;
    sumSq += w * w;
  }
  TruthEstimate est;
  est.value = sum / M;
  const double var = std::max(sumSq / M - est.value * est.value, 0.0);
  est.se = std::sqrt(var / M);
  est.ess = sumSq > 0.0 ? sum * sum / sumSq : 0.0;
  est.degenerate = est.ess < 100.0;
  return est;
}

std::shared_ptr<const TruthDensity> makeTruth(const ScenarioSpec& spec) {
  if (spec.kind == ScenarioKind::Main) return std::make_shared<const MainTruth>(spec);
  return std::make_shared<const LognormalTruth>(spec);
}

// ------------------------------------------------------------------ generators

GroundTruth generateMain(const ScenarioSpec& spec, Exec exec) {
  spec.validate();
  if (spec.kind != ScenarioKind::Main) throw argumentError("generateMain: scenario kind is not the copula mixture design");
  const int q = spec.q, d = spec.dim(), n = spec.n, m = spec.m;
  GroundTruth gt;
  gt.spec = spec;
  auto truth = std::make_shared<const MainTruth>(spec);
  gt.truth = truth;
  gt.data = emptyDataset(spec);
  gt.X.resize(n, d);
  gt.prob.resize(n, q);
  gt.W.resize(n);
  gt.U.resize(n);

  std::vector<std::shared_ptr<const Univariate>> errLaws;
  for (int c = 0; c < d; ++c) errLaws.push_back(mainErrorLaw(c));
  const Eigen::MatrixXd cholX = Eigen::LLT<Eigen::MatrixXd>(spec.corrX).matrixL();
  const Eigen::MatrixXd cholE = Eigen::LLT<Eigen::MatrixXd>(spec.corrEps).matrixL();

  forEachIndex(exec, n, [&](int i) {
    Engine engX = substream(spec.seed, 0, kStepIntake, i);
    const Eigen::VectorXd z = correlatedNormal(engX, cholX);
    Eigen::VectorXd x(d);
    for (int c = 0; c < d; ++c) x[c] = fromScore(truth->marginalLaw(c), z[c]);
    gt.X.row(i) = x.transpose();
    for (int l = 0; l < q; ++l) gt.prob(i, l) = normal::cdf(spec.gamma0[l] + spec.gamma1 * newlog(x[l]));

    Engine eng = substream(spec.seed, 0, kStepOccasion, i);
    Eigen::MatrixXd w(m, q + d), u(m, q + d), y(m, d);
    for (int j = 0; j < m; ++j) {
      // Redraw the occasion in the rare case a reported amount would be nonpositive.
      for (;;) {
        const Eigen::VectorXd e = correlatedNormal(eng, cholE);
        for (int l = 0; l < q; ++l) {
          u(j, l) = draw::standardNormal(eng);
          w(j, l) = spec.gamma0[l] + spec.gamma1 * newlog(x[l]) + u(j, l);
        }
        bool ok = true;
        for (int c = 0; c < d; ++c) {
          const double eps = fromScore(*errLaws[c], e[c]);
          u(j, q + c) = x[c] / spec.scaleDivisor * eps;
          w(j, q + c) = x[c] + u(j, q + c);
          const bool reported = c >= q || w(j, c) > 0.0;
          y(j, c) = reported ? w(j, q + c) : 0.0;
          ok = ok && (!reported || w(j, q + c) > 0.0);
        }
        if (ok) break;
      }
    }
    gt.W[i] = w;
    gt.U[i] = u;
    gt.data.amounts[i] = y;
  });
  gt.data.validate();
  return gt;
}

GroundTruth generateLognormal(const ScenarioSpec& spec, Exec exec) {
  spec.validate();
  if (spec.kind != ScenarioKind::Lognormal) throw argumentError("generateLognormal: scenario kind is not the log-normal design");
  const int q = spec.q, d = spec.dim(), t = 2 * q + spec.p, n = spec.n, m = spec.m;
  GroundTruth gt;
  gt.spec = spec;
  gt.truth = std::make_shared<const LognormalTruth>(spec);
  gt.data = emptyDataset(spec);
  gt.X.resize(n, d);
  gt.prob.resize(n, q);
  gt.W.resize(n);
  gt.U.resize(n);

  const Eigen::MatrixXd cholX = Eigen::LLT<Eigen::MatrixXd>(covariance(spec.varTr, spec.corrTr)).matrixL();
  const Eigen::LLT<Eigen::MatrixXd> lltU(covariance(spec.varU, spec.corrU));
  if (lltU.info() != Eigen::Success) throw configError("scenario: error covariance is not positive definite");
  const Eigen::MatrixXd cholU = lltU.matrixL();

  forEachIndex(exec, n, [&](int i) {
    Engine engX = substream(spec.seed, 0, kStepIntake, i);
    const Eigen::VectorXd xt = spec.muTr + correlatedNormal(engX, cholX);
    for (int c = 0; c < d; ++c) {
      const double level = std::exp(xt[q + c]);
      gt.X(i, c) = c < q ? normal::cdf(xt[c]) * level : level;
    }
    for (int l = 0; l < q; ++l) gt.prob(i, l) = normal::cdf(xt[l] / std::sqrt(spec.varU[l]));

    Engine eng = substream(spec.seed, 0, kStepOccasion, i);
    Eigen::MatrixXd w(m, t), u(m, t), y(m, d);
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd ut = correlatedNormal(eng, cholU);
      for (int l = 0; l < q; ++l) {
        w(j, l) = xt[l] + ut[l];
        u(j, l) = ut[l];
      }
      for (int c = 0; c < d; ++c) {
        const int k = q + c;
        w(j, k) = std::exp(xt[k] + ut[k] - spec.varU[k] / 2.0);
        u(j, k) = w(j, k) - std::exp(xt[k]);
        y(j, c) = (c >= q || w(j, c) > 0.0) ? w(j, k) : 0.0;
      }
    }
    gt.W[i] = w;
    gt.U[i] = u;
    gt.data.amounts[i] = y;
  });
  gt.data.validate();
  return gt;
}

GroundTruth generate(const ScenarioSpec& spec, Exec exec) {
  return spec.kind == ScenarioKind::Main ? generateMain(spec, exec) : generateLognormal(spec, exec);
}

// ------------------------------------------------------------------ scenario echo and sidecar

namespace {

using nlohmann::json;

json toJson(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json toJson(const Eigen::MatrixXd& mtx) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < mtx.rows(); ++r) rows.push_back(toJson(Eigen::VectorXd(mtx.row(r).transpose())));
  return rows;
}

Eigen::VectorXd vectorFrom(const json& j, const std::string& key) {
  if (!j.is_array()) throw configError("scenario." + key + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw configError("scenario." + key + "[" + std::to_string(k) + "] is not a number");
    v[k] = j[k].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrixFrom(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw configError("scenario." + key + " must be a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd mtx(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vectorFrom(j[r], key + "[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != cols) throw configError("scenario." + key + " has ragged rows");
    mtx.row(r) = row.transpose();
  }
  return mtx;
}

}  // namespace

std::string scenarioToJson(const ScenarioSpec& s) {
  json j = {{"kind", s.kind == ScenarioKind::Main ? "main" : "lognormal"},
            {"q", s.q},
            {"p", s.p},
            {"n", s.n},
            {"m", s.m},
            {"seed", s.seed}};
  if (s.kind == ScenarioKind::Main) {
    j["mu_x"] = toJson(s.muX);
    j["pi_x"] = toJson(s.piX);
    j["var_x"] = s.varX;
    j["lower"] = s.lower;
    j["upper"] = s.upper;
    j["corr_x"] = toJson(s.corrX);
    j["corr_eps"] = toJson(s.corrEps);
    j["gamma0"] = toJson(s.gamma0);
    j["gamma1"] = s.gamma1;
    j["scale_divisor"] = s.scaleDivisor;
  } else {
    j["mu_tr"] = toJson(s.muTr);
    j["var_tr"] = toJson(s.varTr);
    j["corr_tr"] = toJson(s.corrTr);
    j["var_u"] = toJson(s.varU);
    j["corr_u"] = toJson(s.corrU);
    j["is_samples"] = s.isSamples;
  }
  return j.dump();
}

ScenarioSpec scenarioFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw configError(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw configError("scenario must be an object");
  static const std::vector<std::string> known = {"kind", "q", "p", "n", "m", "seed", "mu_x", "pi_x", "var_x",
                                                 "lower", "upper", "corr_x", "corr_eps", "gamma0", "gamma1",
                                                 "scale_divisor", "mu_tr", "var_tr", "corr_tr", "var_u", "corr_u",
                                                 "is_samples"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw configError("scenario: unknown field \"" + key + "\"");

  auto integer = [&](const char* key, long fallback) -> long {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw configError(std::string("scenario.") + key + " must be an integer");
    return j[key].get<long>();
  };
  auto real = [&](const char* key, double fallback) -> double {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw configError(std::string("scenario.") + key + " must be a number");
    return j[key].get<double>();
  };

  const std::string kind = j.value("kind", std::string("main"));
  if (kind != "main" && kind != "lognormal") throw configError("scenario.kind must be \"main\" or \"lognormal\"");
  const int q = static_cast<int>(integer("q", 2)), p = static_cast<int>(integer("p", 1));
  if (q < 0 || p < 0 || q + p < 1) throw configError("scenario: need q, p >= 0 and q + p >= 1");
  ScenarioSpec s = kind == "main" ? mainScenario(q, p) : lognormalScenario(q, p);
  s.n = static_cast<int>(integer("n", s.n));
  s.m = static_cast<int>(integer("m", s.m));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw configError("scenario.seed must be a nonnegative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("mu_x")) s.muX = matrixFrom(j["mu_x"], "mu_x");
  if (j.contains("pi_x")) s.piX = vectorFrom(j["pi_x"], "pi_x");
  s.varX = real("var_x", s.varX);
  s.lower = real("lower", s.lower);
  s.upper = real("upper", s.upper);
  if (j.contains("corr_x")) s.corrX = matrixFrom(j["corr_x"], "corr_x");
  if (j.contains("corr_eps")) s.corrEps = matrixFrom(j["corr_eps"], "corr_eps");
  if (j.contains("gamma0")) s.gamma0 = vectorFrom(j["gamma0"], "gamma0");
  s.gamma1 = real("gamma1", s.gamma1);
  s.scaleDivisor = real("scale_divisor", s.scaleDivisor);
  if (j.contains("mu_tr")) s.muTr = vectorFrom(j["mu_tr"], "mu_tr");
  if (j.contains("var_tr")) s.varTr = vectorFrom(j["var_tr"], "var_tr");
  if (j.contains("corr_tr")) s.corrTr = matrixFrom(j["corr_tr"], "corr_tr");
  if (j.contains("var_u")) s.varU = vectorFrom(j["var_u"], "var_u");
  if (j.contains("corr_u")) s.corrU = matrixFrom(j["corr_u"], "corr_u");
  s.isSamples = static_cast<int>(integer("is_samples", s.isSamples));
  s.validate();
  return s;
}

void writeTruthSidecar(const GroundTruth& gt, std::ostream& out) {
  out << "# decon-truth v1\n# scenario " << scenarioToJson(gt.spec) << "\nsubject";
  for (const auto& name : gt.data.names) out << ',' << name;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < gt.X.rows(); ++i) {
    out << gt.data.subjectIds[i];
    for (Eigen::Index c = 0; c < gt.X.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", gt.X(i, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

TruthSidecar readTruthSidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dataError("cannot open truth file " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# decon-truth v1") throw dataError(path + ": missing truth header");
  if (!std::getline(in, line) || line.rfind("# scenario ", 0) != 0) throw dataError(path + ": missing scenario line");
  TruthSidecar sc;
  sc.spec = scenarioFromJson(line.substr(11));
  if (!std::getline(in, line)) throw dataError(path + ": missing column header");
  {
    std::stringstream ss(line);
    std::string name;
    std::getline(ss, name, ',');
    while (std::getline(ss, name, ',')) sc.names.push_back(name);
  }
  const int d = static_cast<int>(sc.names.size());
  if (d != sc.spec.dim()) throw dataError(path + ": column count does not match the scenario");
  std::vector<double> values;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    sc.subjectIds.push_back(std::stol(cell));
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++c;
    }
    if (c != d) throw dataError(path + ": row " + std::to_string(row + 1) + " has " + std::to_string(c) + " values");
    ++row;
  }
  sc.X.resize(row, d);
  for (int i = 0; i < row; ++i)
    for (int c = 0; c < d; ++c) sc.X(i, c) = values[static_cast<std::size_t>(i) * d + c];
  return sc;
}

}  // namespace decon
