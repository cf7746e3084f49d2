#include <algorithm>
#include <cmath>

#include "decon/error.hpp"
#include "decon/normal.hpp"
#include "decon/optimize.hpp"
#include "decon/sampler.hpp"

namespace decon {

void Hyperparameters::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw configError(std::string("fit.") + name + " must be positive");
  };
  if (!(upper > lower)) throw configError("fit.upper must exceed fit.lower");
  if (numBases < 5) throw configError("fit.num_bases must be at least 5");
  if (kX < 0 || kEps < 0) throw configError("fit.k_x and fit.k_eps must be nonnegative");
  positive(alphaX, "alpha_x");
  positive(alphaEps, "alpha_eps");
  positive(aXi, "a_xi");
  positive(bXi, "b_xi");
  positive(aBeta, "a_beta");
  positive(bBeta, "b_beta");
  positive(aVartheta, "a_vartheta");
  positive(bVartheta, "b_vartheta");
  positive(varX0, "var_x0");
  positive(aVarX0, "a_var_x0");
  positive(bVarX0, "b_var_x0");
  positive(varMuTilde, "var_mu_tilde");
  positive(aEps, "a_eps");
  positive(bEps, "b_eps");
  positive(varBeta0, "var_beta0");
  positive(initSmoothVar, "init_smooth_var");
  positive(propXi, "prop_xi");
  positive(propVartheta, "prop_vartheta");
  positive(propX, "prop_x");
  positive(propMuX, "prop_mu_x");
  positive(propVarX, "prop_var_x");
  positive(propPEps, "prop_p_eps");
  positive(propMuTilde, "prop_mu_tilde");
  positive(propVarEps, "prop_var_eps");
  if (gridSize < 3) throw configError("fit.grid_size must be at least 3");
  if (iterations < 1) throw configError("fit.iterations must be positive");
  if (burnin < 0 || burnin >= iterations) throw configError("fit.burnin must lie in [0, iterations)");
  if (thin < 1) throw configError("fit.thin must be positive");
  if (adaptEvery < 1) throw configError("fit.adapt_every must be positive");
  if (warmupSweeps < 0) throw configError("fit.warmup_sweeps must be nonnegative");
}

namespace {

double silvermanBandwidth(const Eigen::VectorXd& v) {
  const double n = static_cast<double>(v.size());
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / std::max(n - 1.0, 1.0));
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  const double iqr = s[static_cast<std::size_t>(0.75 * (n - 1))] - s[static_cast<std::size_t>(0.25 * (n - 1))];
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(n, -0.2);
}

}  // namespace

void Sampler::initDensityCoefficients(int l) {
  const Eigen::VectorXd x = st_.X.col(l);
  const int n = static_cast<int>(x.size());
  const double h = silvermanBandwidth(x);
  Eigen::VectorXd kern(n);
  for (int i = 0; i < n; ++i) {
    double t = 0.0;
    for (int k = 0; k < n; ++k) t += normal::pdf((x[i] - x[k]) / h);
    kern[i] = t / (n * h);
  }
  const double sig2 = st_.sig2Xi[l];
  auto objective = [&](const Eigen::VectorXd& coef) {
    const BsplineDensity f(basis_, coef);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = kern[i] - f.pdf(x[i]);
      ss += r * r;
    }
    return ss + coef.dot(penalty_ * coef) / (2.0 * sig2);
  };
  Eigen::VectorXd xi = minimizeBfgs(objective, Eigen::VectorXd::Zero(basis_.size())).x;
  st_.params.xi[l] = xi.array() - xi.mean();
}

void Sampler::initCurve(int l) {
  const int n = data_.numSubjects();
  Eigen::VectorXd prop(n);
  for (int i = 0; i < n; ++i) {
    int consumed = 0;
    for (int j = 0; j < data_.numOccasions(i); ++j) consumed += data_.consumed(i, j, l);
    prop[i] = static_cast<double>(consumed) / data_.numOccasions(i);
  }
  const double sig2 = st_.sig2Beta[l];
  auto objective = [&](const Eigen::VectorXd& coef) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = prop[i] - normal::cdf(basis_.combine(st_.X(i, l), coef));
      ss += r * r;
    }
    return ss + coef.dot(penalty_ * coef) / (2.0 * sig2);
  };
  const double start = normal::quantile(std::clamp(prop.mean(), 0.02, 0.98));
  st_.params.beta[l] = minimizeBfgs(objective, Eigen::VectorXd::Constant(basis_.size(), start)).x;
}

void Sampler::initVarianceFunction(int c) {
  const int n = data_.numSubjects();
  std::vector<double> centers;
  std::vector<double> sumSq;
  std::vector<int> counts;
  for (int i = 0; i < n; ++i) {
    std::vector<double> vals;
    for (int j = 0; j < data_.numOccasions(i); ++j)
      if (data_.amounts[i](j, c) > 0.0) vals.push_back(data_.amounts[i](j, c));
    if (vals.size() < 2) continue;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    centers.push_back(std::clamp(mean, hp_.lower, hp_.upper));
    sumSq.push_back(ss);
    counts.push_back(static_cast<int>(vals.size()));
  }
  double pooled = 0.0;
  int dof = 0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    pooled += sumSq[k];
    dof += counts[k] - 1;
  }
  const double start = dof > 0 && pooled > 0.0 ? std::log(pooled / dof) : 0.0;
  if (centers.empty()) {
    st_.params.vartheta[c] = Eigen::VectorXd::Constant(basis_.size(), start);
    return;
  }
  const double sig2 = st_.sig2Vartheta[c];
  auto objective = [&](const Eigen::VectorXd& coef) {
    const VarianceFunction vf(basis_, coef);
    double total = 0.0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double v = vf.variance(centers[k]);
      total += sumSq[k] / (2.0 * v) + 0.5 * counts[k] * std::log(v);
    }
    return total + coef.dot(penalty_ * coef) / (2.0 * sig2);
  };
  st_.params.vartheta[c] = minimizeBfgs(objective, Eigen::VectorXd::Constant(basis_.size(), start)).x;
}

void Sampler::initRegularAtoms() {
  const int n = data_.numSubjects(), q = data_.q, p = data_.p;
  ModelParams& pr = st_.params;
  const int K = pr.numAtomsX();
  Eigen::VectorXd pooled(n * p);
  for (int r = 0; r < p; ++r) pooled.segment(r * n, n) = st_.X.col(q + r);
  Eigen::VectorXd centers;
  const Eigen::VectorXi labels = kmeans1d(pooled, K, centers);
  for (int k = 0; k < K; ++k) {
    double ss = 0.0;
    int cnt = 0;
    for (Eigen::Index t = 0; t < pooled.size(); ++t)
      if (labels[t] == k) {
        ss += (pooled[t] - centers[k]) * (pooled[t] - centers[k]);
        ++cnt;
      }
    pr.muX[k] = centers[k];
    pr.varX[k] = cnt > 1 ? std::max(ss / (cnt - 1), 0.1) : 1.0;
  }
  for (int r = 0; r < p; ++r) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(K, hp_.alphaX / K);
    for (int i = 0; i < n; ++i) {
      st_.labelX(i, r) = labels[r * n + i];
      w[labels[r * n + i]] += 1.0;
    }
    pr.piX.row(r) = (w / w.sum()).transpose();
  }
}

void Sampler::initialize() {
  const int n = data_.numSubjects(), q = data_.q, p = data_.p, d = data_.numComponents();
  const int J = hp_.numBases;
  bool replicated = false;
  for (int i = 0; i < n; ++i) replicated = replicated || data_.numOccasions(i) >= 3;
  if (!replicated) throw dataError("initialization: at least one subject needs three or more recalls");
  for (const auto& a : data_.amounts)
    if (a.maxCoeff() > 2.0 * hp_.upper + 1e-9)
      throw dataError("initialization: recalls must be scaled into the model support first");

  st_ = ChainState{};
  ModelParams& pr = st_.params;
  pr.lower = hp_.lower;
  pr.upper = hp_.upper;
  pr.allocate(q, p, J, hp_.resolvedKX(d), hp_.resolvedKEps(d));
  const int KEps = pr.numAtomsEps();

  const double margin = 0.01 * (hp_.upper - hp_.lower);
  st_.X.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < d; ++l)
      st_.X(i, l) = std::clamp(data_.amounts[i].col(l).mean(), hp_.lower + margin, hp_.upper - margin);

  st_.sig2Xi.assign(q, hp_.initSmoothVar);
  st_.sig2Beta.assign(q, hp_.initSmoothVar);
  st_.sig2Vartheta.assign(d, hp_.initSmoothVar);
  st_.scaleXi.assign(q, hp_.propXi);
  st_.scaleVartheta.assign(d, hp_.propVartheta);
  st_.scaleX.assign(d, hp_.propX);

  for (int l = 0; l < q; ++l) {
    initDensityCoefficients(l);
    initCurve(l);
  }
  for (int c = 0; c < d; ++c) initVarianceFunction(c);

  st_.labelX = Eigen::MatrixXi::Zero(n, p);
  if (p > 0) initRegularAtoms();

  pr.pEps.setConstant(0.5);
  pr.muTildeEps.setZero();
  pr.var1Eps.setOnes();
  pr.var2Eps.setOnes();
  st_.labelEps.resize(n);
  st_.label2Eps.resize(n);
  st_.W.resize(n);
  for (int i = 0; i < n; ++i) {
    const int m = data_.numOccasions(i);
    st_.labelEps[i] = Eigen::MatrixXi::Zero(m, d);
    st_.label2Eps[i] = Eigen::MatrixXi::Zero(m, d);
    st_.W[i] = Eigen::MatrixXd::Zero(m, q + d);
    st_.W[i].rightCols(d) = data_.amounts[i];
  }
  {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(KEps, hp_.alphaEps / KEps);
    w[0] += data_.totalOccasions();
    for (int c = 0; c < d; ++c) pr.piEps.row(c) = (w / w.sum()).transpose();
  }

  const int mid = (hp_.gridSize - 1) / 2;
  st_.bIdxX = Eigen::VectorXi::Constant(pr.bX.size(), mid);
  st_.thetaIdxX = Eigen::VectorXi::Constant(pr.thetaX.size(), mid);
  st_.bIdxEps = st_.bIdxX;
  st_.thetaIdxEps = st_.thetaIdxX;
  for (int t = 0; t < pr.bX.size(); ++t) pr.bX[t] = pr.bEps[t] = gridB(mid, hp_.gridSize);
  for (int s = 0; s < pr.thetaX.size(); ++s) pr.thetaX[s] = pr.thetaEps[s] = gridTheta(mid, hp_.gridSize);

  // Latent surrogates from the standard-normal error special case, then warm up the
  // shared atoms with intakes and surrogates held fixed.
  streamKey_ = 1ULL << 40;
  refreshDerived();
  imputeSurrogates();
  for (int w = 0; w < hp_.warmupSweeps; ++w) {
    streamKey_ = (1ULL << 40) + 1 + w;
    if (p > 0) updateRegularMixture();
    updateErrorMixture();
  }
  stats_.clear();
  window_.clear();
  st_.iteration = 0;
}

}  // namespace decon
