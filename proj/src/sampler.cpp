#include "decon/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "decon/error.hpp"
#include "decon/normal.hpp"

namespace decon {

namespace {

constexpr std::uint64_t kGlobalStream = ~0ULL;

enum Step : int {
  kStepXi = 1,
  kStepMixWeights,
  kStepMixLabels,
  kStepMixAtoms,
  kStepEpsWeights,
  kStepEpsLabels,
  kStepEpsAtoms,
  kStepVartheta,
  kStepImpute,
  kStepCurves,
  kStepIntakes,
  kStepCopula,
};

double logInvGammaPrior(double v, double a, double b) { return -(a + 1.0) * std::log(v) - b / v; }

// log mass of N(c, s^2) on the proposal window [max(0, c-1), c+1].
double logWindowMass(double c, double s) { return normal::logMass((std::max(0.0, c - 1.0) - c) / s, 1.0 / s); }

double drawWindowed(Engine& eng, double c, double s) {
  return draw::truncatedNormal(eng, c, s, std::max(0.0, c - 1.0), c + 1.0);
}

std::vector<RestrictedErrorKernel> makeKernels(const ModelParams& pr) {
  std::vector<RestrictedErrorKernel> out;
  out.reserve(pr.numAtomsEps());
  for (int k = 0; k < pr.numAtomsEps(); ++k)
    out.emplace_back(pr.pEps[k], pr.muTildeEps[k], pr.var1Eps[k], pr.var2Eps[k]);
  return out;
}

}  // namespace

// ------------------------------------------------------------------ conditionals

namespace conditional {

Eigen::VectorXd mixtureWeights(Engine& eng, const Eigen::VectorXi& counts, double alpha) {
  return draw::dirichlet(eng, counts.cast<double>().array() + alpha / counts.size());
}

int label(Engine& eng, const Eigen::VectorXd& logTerms) {
  return draw::categoricalLog(eng, logTerms.data(), static_cast<int>(logTerms.size()));
}

double smoothingVariance(Engine& eng, const Eigen::VectorXd& coef, const Eigen::MatrixXd& penalty, double a,
                         double b) {
  const double shape = a + (static_cast<double>(coef.size()) + 2.0) / 2.0;
  const double rate = b + 0.5 * coef.dot(penalty * coef);
  return draw::inverseGamma(eng, shape, rate);
}

Gaussian curveCoefficients(const SplineBasis& basis, const Eigen::VectorXd& x, const Eigen::VectorXi& reps,
                           const Eigen::VectorXd& wSums, const Eigen::MatrixXd& penalty, double sig2, double mu0,
                           double var0) {
  const int J = basis.size();
  Eigen::MatrixXd Q = penalty / sig2;
  Q.diagonal().array() += 1.0 / var0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(J, mu0 / var0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto loc = basis.local(x[i]);
    for (int a = 0; a < 3; ++a) {
      rhs[loc.first + a] += wSums[i] * loc.value[a];
      for (int b = 0; b < 3; ++b) Q(loc.first + a, loc.first + b) += reps[i] * loc.value[a] * loc.value[b];
    }
  }
  Gaussian g;
  g.precision = Q;
  g.mean = Q.llt().solve(rhs);
  return g;
}

Eigen::VectorXd drawGaussian(Engine& eng, const Gaussian& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.precision);
  if (llt.info() != Eigen::Success) throw numericalError("Gaussian draw: precision not positive definite");
  Eigen::VectorXd z(g.mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = draw::standardNormal(eng);
  return g.mean + llt.matrixU().solve(z);
}

double pseudoSurrogate(Engine& eng, double h, bool consumed) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return consumed ? draw::truncatedNormal(eng, h, 1.0, 0.0, inf) : draw::truncatedNormal(eng, h, 1.0, -inf, 0.0);
}

}  // namespace conditional

double gridB(int index, int gridSize) { return -0.99 + 2.0 * 0.99 * index / (gridSize - 1); }
double gridTheta(int index, int gridSize) { return -3.14 + 2.0 * 3.14 * index / (gridSize - 1); }

// ------------------------------------------------------------------ plumbing

Sampler::Sampler(const RecallDataset& data, Hyperparameters hp, std::uint64_t seed, Exec exec)
    : data_(data), hp_(hp), seed_(seed), exec_(exec) {
  data_.validate();
  hp_.validate();
  basis_ = SplineBasis(hp_.lower, hp_.upper, hp_.numBases);
  penalty_ = makePenalty(hp_.numBases);
}

Engine Sampler::globalEngine(int step) const { return substream(seed_, streamKey_, step, kGlobalStream); }

Engine Sampler::subjectEngine(int step, int subject) const { return substream(seed_, streamKey_, step, subject); }

void Sampler::record(const std::string& block, long proposed, long accepted) {
  auto& s = stats_[block];
  s.proposed += proposed;
  s.accepted += accepted;
  auto& w = window_[block];
  w.proposed += proposed;
  w.accepted += accepted;
}

void Sampler::refreshDerived() {
  const int n = data_.numSubjects();
  const int q = data_.q, d = data_.numComponents();
  std::vector<ConsumptionCurve> curves;
  for (int l = 0; l < q; ++l) curves.emplace_back(basis_, st_.params.beta[l]);
  std::vector<VarianceFunction> vf;
  for (int c = 0; c < d; ++c) vf.emplace_back(basis_, st_.params.vartheta[c]);
  xt_.resize(n, q + d);
  sd_.resize(n, d);
  forEachIndex(exec_, n, [&](int i) {
    xt_.row(i) = transformIntake(st_.X.row(i).transpose(), curves).transpose();
    for (int c = 0; c < d; ++c) sd_(i, c) = vf[c].sd(xt_(i, q + c));
  });
}

void Sampler::adapt() {
  auto tune = [&](const std::string& block, double& scale) {
    auto it = window_.find(block);
    if (it == window_.end() || it->second.proposed == 0) return;
    const double r = it->second.rate();
    if (r < hp_.adaptLow) scale *= 0.7;
    else if (r > hp_.adaptHigh) scale *= 1.3;
  };
  for (std::size_t l = 0; l < st_.scaleXi.size(); ++l) tune("xi[" + std::to_string(l) + "]", st_.scaleXi[l]);
  for (std::size_t c = 0; c < st_.scaleVartheta.size(); ++c)
    tune("vartheta[" + std::to_string(c) + "]", st_.scaleVartheta[c]);
  for (std::size_t l = 0; l < st_.scaleX.size(); ++l) tune("X[" + std::to_string(l) + "]", st_.scaleX[l]);
  window_.clear();
}

void Sampler::sweep() {
  streamKey_ = static_cast<std::uint64_t>(st_.iteration);
  refreshDerived();
  if (data_.q > 0) updateEpisodicDensities();
  if (data_.p > 0) updateRegularMixture();
  updateErrorMixture();
  updateVarianceFunctions();
  imputeSurrogates();
  if (data_.q > 0) updateCurves();
  updateIntakes();
  if (data_.numComponents() > 1) updateCopulas();
  if (st_.iteration < hp_.burnin && (st_.iteration + 1) % hp_.adaptEvery == 0) adapt();
  ++st_.iteration;
}

PosteriorDraws Sampler::run(const std::function<void(long)>& progress) {
  PosteriorDraws out;
  out.shape = st_.params;
  out.names = data_.names;
  out.scale = data_.scale;
  out.iterations = hp_.iterations;
  out.burnin = hp_.burnin;
  out.thin = hp_.thin;
  out.seed = seed_;
  out.subjectIds = data_.subjectIds;
  const int n = data_.numSubjects(), d = data_.numComponents();
  out.meanX = Eigen::MatrixXd::Zero(n, d);
  out.meanXt = Eigen::MatrixXd::Zero(n, d);
  for (int it = 0; it < hp_.iterations; ++it) {
    try {
      sweep();
    } catch (const Error& e) {
      throw Error(e.kind(), "iteration " + std::to_string(it) + ": " + e.what());
    }
    const int done = it + 1;
    if (done > hp_.burnin && (done - hp_.burnin) % hp_.thin == 0) {
      out.draws.push_back(st_.params);
      const ModelView view(st_.params);
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd x = st_.X.row(i).transpose();
        out.meanX.row(i) += x.transpose();
        out.meanXt.row(i) += transformIntake(x, view.curves()).tail(d).transpose();
      }
    }
    if (progress) progress(done);
  }
  out.acceptance = stats_;
  if (!out.draws.empty()) {
    out.meanX /= static_cast<double>(out.draws.size());
    out.meanXt /= static_cast<double>(out.draws.size());
  }
  return out;
}

// ------------------------------------------------------------------ step 1: intake marginals

void Sampler::updateEpisodicDensities() {
  const int n = data_.numSubjects();
  Engine eng = globalEngine(kStepXi);
  for (int l = 0; l < data_.q; ++l) {
    Eigen::VectorXd& xi = st_.params.xi[l];
    const double sig2 = st_.sig2Xi[l];
    auto logTarget = [&](const Eigen::VectorXd& coef) {
      const BsplineDensity f(basis_, coef);
      const double ll = orderedSum(exec_, n, [&](int i) { return std::log(f.pdf(st_.X(i, l))); });
      return ll - coef.dot(penalty_ * coef) / (2.0 * sig2);
    };
    Eigen::VectorXd prop = xi;
    for (Eigen::Index k = 0; k < prop.size(); ++k) prop[k] += st_.scaleXi[l] * draw::standardNormal(eng);
    const double logU = std::log(draw::uniform(eng));
    const bool accept = logU < logTarget(prop) - logTarget(xi);
    if (accept) xi = prop.array() - prop.mean();
    record("xi[" + std::to_string(l) + "]", 1, accept);
    st_.sig2Xi[l] = conditional::smoothingVariance(eng, xi, penalty_, hp_.aXi, hp_.bXi);
  }
}

void Sampler::updateRegularMixture() {
  const int n = data_.numSubjects(), q = data_.q, p = data_.p;
  ModelParams& pr = st_.params;
  const int K = pr.numAtomsX();
  const double A = hp_.lower, B = hp_.upper;

  {
    Engine eng = globalEngine(kStepMixWeights);
    for (int r = 0; r < p; ++r) {
      Eigen::VectorXi counts = Eigen::VectorXi::Zero(K);
      for (int i = 0; i < n; ++i) ++counts[st_.labelX(i, r)];
      pr.piX.row(r) = conditional::mixtureWeights(eng, counts, hp_.alphaX).transpose();
    }
  }

  Eigen::VectorXd logMass(K);
  for (int k = 0; k < K; ++k) {
    const double s = std::sqrt(pr.varX[k]);
    logMass[k] = normal::logMass((A - pr.muX[k]) / s, (B - pr.muX[k]) / s);
  }
  forEachIndex(exec_, n, [&](int i) {
    Engine e = subjectEngine(kStepMixLabels, i);
    Eigen::VectorXd terms(K);
    for (int r = 0; r < p; ++r) {
      const double x = st_.X(i, q + r);
      for (int k = 0; k < K; ++k)
        terms[k] = std::log(pr.piX(r, k)) + normal::logDensity(x, pr.muX[k], pr.varX[k]) - logMass[k];
      st_.labelX(i, r) = conditional::label(e, terms);
    }
  });

  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(K), sx = cnt, sxx = cnt;
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < p; ++r) {
      const int k = st_.labelX(i, r);
      const double x = st_.X(i, q + r);
      cnt[k] += 1.0;
      sx[k] += x;
      sxx[k] += x * x;
    }
  auto logLik = [&](int k, double mu, double var) {
    if (cnt[k] == 0.0) return 0.0;
    const double s = std::sqrt(var);
    const double quad = sxx[k] - 2.0 * mu * sx[k] + cnt[k] * mu * mu;
    return -0.5 * cnt[k] * std::log(var) - quad / (2.0 * var) - cnt[k] * normal::logMass((A - mu) / s, (B - mu) / s);
  };
  Engine eng = globalEngine(kStepMixAtoms);
  long accMu = 0, accVar = 0;
  for (int k = 0; k < K; ++k) {
    const double mu = pr.muX[k], var = pr.varX[k];
    const double muNew = mu + hp_.propMuX * draw::standardNormal(eng);
    const double logA = logLik(k, muNew, var) - logLik(k, mu, var) +
                        normal::logDensity(muNew, hp_.muX0, hp_.varX0) - normal::logDensity(mu, hp_.muX0, hp_.varX0);
    if (std::log(draw::uniform(eng)) < logA) {
      pr.muX[k] = muNew;
      ++accMu;
    }
    const double m = pr.muX[k];
    const double varNew = drawWindowed(eng, var, hp_.propVarX);
    bool accept = false;
    if (varNew > 1e-8) {
      const double logB = logLik(k, m, varNew) - logLik(k, m, var) + logInvGammaPrior(varNew, hp_.aVarX0, hp_.bVarX0) -
                          logInvGammaPrior(var, hp_.aVarX0, hp_.bVarX0) + logWindowMass(var, hp_.propVarX) -
                          logWindowMass(varNew, hp_.propVarX);
      accept = std::log(draw::uniform(eng)) < logB;
    }
    if (accept) {
      pr.varX[k] = varNew;
      ++accVar;
    }
  }
  record("muX", K, accMu);
  record("varX", K, accVar);
}

// ------------------------------------------------------------------ step 2: scaled-error mixture

void Sampler::updateErrorMixture() {
  const int n = data_.numSubjects(), q = data_.q, d = data_.numComponents();
  ModelParams& pr = st_.params;
  const int K = pr.numAtomsEps();

  std::vector<Eigen::MatrixXd> eps(n);
  forEachIndex(exec_, n, [&](int i) {
    eps[i].resize(data_.numOccasions(i), d);
    for (int j = 0; j < data_.numOccasions(i); ++j)
      for (int c = 0; c < d; ++c) eps[i](j, c) = (st_.W[i](j, q + c) - xt_(i, q + c)) / sd_(i, c);
  });

  {
    Engine eng = globalEngine(kStepEpsWeights);
    for (int c = 0; c < d; ++c) {
      Eigen::VectorXi counts = Eigen::VectorXi::Zero(K);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < data_.numOccasions(i); ++j) ++counts[st_.labelEps[i](j, c)];
      pr.piEps.row(c) = conditional::mixtureWeights(eng, counts, hp_.alphaEps).transpose();
    }
  }

  {
    const auto kernels = makeKernels(pr);
    forEachIndex(exec_, n, [&](int i) {
      Engine e = subjectEngine(kStepEpsLabels, i);
      Eigen::VectorXd terms(K);
      for (int j = 0; j < data_.numOccasions(i); ++j)
        for (int c = 0; c < d; ++c) {
          for (int k = 0; k < K; ++k) terms[k] = std::log(pr.piEps(c, k)) + kernels[k].logPdf(eps[i](j, c));
          st_.labelEps[i](j, c) = conditional::label(e, terms);
        }
    });
  }

  std::vector<std::vector<double>> members(K);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < data_.numOccasions(i); ++j)
      for (int c = 0; c < d; ++c) members[st_.labelEps[i](j, c)].push_back(eps[i](j, c));

  Engine eng = globalEngine(kStepEpsAtoms);
  long accepted = 0;
  for (int k = 0; k < K; ++k) {
    const double p0 = pr.pEps[k], m0 = pr.muTildeEps[k], v10 = pr.var1Eps[k], v20 = pr.var2Eps[k];
    const double p1 = draw::truncatedNormal(eng, p0, hp_.propPEps, 0.0, 1.0);
    const double m1 = m0 + hp_.propMuTilde * draw::standardNormal(eng);
    const double v11 = drawWindowed(eng, v10, hp_.propVarEps);
    const double v21 = drawWindowed(eng, v20, hp_.propVarEps);
    const double logU = std::log(draw::uniform(eng));
    if (!(v11 > 1e-8) || !(v21 > 1e-8)) continue;
    auto logPost = [&](double pp, double mm, double a, double b) {
      const RestrictedErrorKernel ker(pp, mm, a, b);
      double ll = 0.0;
      for (double e : members[k]) ll += ker.logPdf(e);
      return ll + normal::logDensity(mm, 0.0, hp_.varMuTilde) + logInvGammaPrior(a, hp_.aEps, hp_.bEps) +
             logInvGammaPrior(b, hp_.aEps, hp_.bEps);
    };
    const double sp = hp_.propPEps;
    const double logQ = normal::logMass(-p0 / sp, (1.0 - p0) / sp) - normal::logMass(-p1 / sp, (1.0 - p1) / sp) +
                        logWindowMass(v10, hp_.propVarEps) - logWindowMass(v11, hp_.propVarEps) +
                        logWindowMass(v20, hp_.propVarEps) - logWindowMass(v21, hp_.propVarEps);
    const double logA = logPost(p1, m1, v11, v21) - logPost(p0, m0, v10, v20) + logQ;
    if (logU < logA) {
      pr.pEps[k] = p1;
      pr.muTildeEps[k] = m1;
      pr.var1Eps[k] = v11;
      pr.var2Eps[k] = v21;
      ++accepted;
    }
  }
  record("epsAtoms", K, accepted);
}

// ------------------------------------------------------------------ step 3: variance functions

void Sampler::updateVarianceFunctions() {
  const int n = data_.numSubjects(), q = data_.q, d = data_.numComponents();
  ModelParams& pr = st_.params;
  const auto kernels = makeKernels(pr);
  Engine eng = globalEngine(kStepVartheta);
  for (int c = 0; c < d; ++c) {
    const double sig2 = st_.sig2Vartheta[c];
    auto logTarget = [&](const Eigen::VectorXd& coef) {
      const VarianceFunction vf(basis_, coef);
      const double ll = orderedSum(exec_, n, [&](int i) {
        const double x = xt_(i, q + c);
        const double s = vf.sd(x);
        const double logS = std::log(s);
        double t = 0.0;
        for (int j = 0; j < data_.numOccasions(i); ++j)
          t += kernels[st_.labelEps[i](j, c)].logPdf((st_.W[i](j, q + c) - x) / s) - logS;
        return t;
      });
      return ll - coef.dot(penalty_ * coef) / (2.0 * sig2);
    };
    Eigen::VectorXd& theta = pr.vartheta[c];
    Eigen::VectorXd prop = theta;
    for (Eigen::Index k = 0; k < prop.size(); ++k) prop[k] += st_.scaleVartheta[c] * draw::standardNormal(eng);
    const double logU = std::log(draw::uniform(eng));
    const bool accept = logU < logTarget(prop) - logTarget(theta);
    if (accept) theta = prop;
    record("vartheta[" + std::to_string(c) + "]", 1, accept);
    st_.sig2Vartheta[c] = conditional::smoothingVariance(eng, theta, penalty_, hp_.aVartheta, hp_.bVartheta);
  }
  refreshDerived();
}

// ------------------------------------------------------------------ step 4: latent surrogates

void Sampler::imputeSurrogates() {
  const int n = data_.numSubjects(), q = data_.q;
  const ModelParams& pr = st_.params;
  const auto kernels = makeKernels(pr);
  forEachIndex(exec_, n, [&](int i) {
    Engine e = subjectEngine(kStepImpute, i);
    for (int j = 0; j < data_.numOccasions(i); ++j) {
      for (int l = 0; l < q; ++l) st_.W[i](j, l) = conditional::pseudoSurrogate(e, xt_(i, l), data_.consumed(i, j, l));
      for (int l = 0; l < q; ++l) {
        if (data_.consumed(i, j, l)) continue;
        const auto& ker = kernels[st_.labelEps[i](j, l)];
        const int t = draw::uniform(e) < ker.p() ? 0 : 1;
        st_.label2Eps[i](j, l) = t;
        const double mean = t == 0 ? ker.mu1() : ker.mu2();
        const double var = t == 0 ? ker.var1() : ker.var2();
        const double s = sd_(i, l);
        st_.W[i](j, q + l) = xt_(i, q + l) + s * mean + s * std::sqrt(var) * draw::standardNormal(e);
      }
    }
  });
}

// ------------------------------------------------------------------ step 5: consumption curves

void Sampler::updateCurves() {
  const int n = data_.numSubjects();
  Engine eng = globalEngine(kStepCurves);
  Eigen::VectorXi reps(n);
  for (int i = 0; i < n; ++i) reps[i] = data_.numOccasions(i);
  for (int l = 0; l < data_.q; ++l) {
    Eigen::VectorXd wSums(n);
    for (int i = 0; i < n; ++i) wSums[i] = st_.W[i].col(l).sum();
    const auto g = conditional::curveCoefficients(basis_, st_.X.col(l), reps, wSums, penalty_, st_.sig2Beta[l],
                                                  hp_.muBeta0, hp_.varBeta0);
    st_.params.beta[l] = conditional::drawGaussian(eng, g);
    st_.sig2Beta[l] = conditional::smoothingVariance(eng, st_.params.beta[l], penalty_, hp_.aBeta, hp_.bBeta);
  }
  refreshDerived();
}

// ------------------------------------------------------------------ step 6: latent intakes

namespace {

struct SubjectTerms {
  Eigen::VectorXd logf, y;    // per component
  Eigen::MatrixXd logfe, ye;  // per occasion x amount coordinate
  Eigen::MatrixXd pseudo;     // per occasion x episodic component
};

void fillComponent(const ModelView& view, const Eigen::MatrixXd& w, const Eigen::VectorXd& x, int l,
                   SubjectTerms& t) {
  const int q = view.q();
  t.logf[l] = view.marginalX(l).logPdf(x[l]);
  t.y[l] = normalScoreClamped(view.marginalX(l), x[l]);
  double amountMean = x[l];
  if (l < q) {
    const double h = view.curve(l).h(x[l]);
    amountMean = x[l] / std::max(normal::cdf(h), kProbFloor);
    for (Eigen::Index j = 0; j < w.rows(); ++j) t.pseudo(j, l) = normal::logPdf(w(j, l) - h);
  }
  const double s = view.variance(l).sd(amountMean);
  const double logS = std::log(s);
  const ErrorMixture& law = view.errorLaw(l);
  for (Eigen::Index j = 0; j < w.rows(); ++j) {
    const double e = (w(j, q + l) - amountMean) / s;
    t.logfe(j, l) = law.logPdf(e) - logS;
    t.ye(j, l) = normalScoreClamped(law, e);
  }
}

SubjectTerms subjectTerms(const ModelView& view, const Eigen::MatrixXd& w, const Eigen::VectorXd& x) {
  const int d = view.dim(), q = view.q();
  const Eigen::Index m = w.rows();
  SubjectTerms t{Eigen::VectorXd(d), Eigen::VectorXd(d), Eigen::MatrixXd(m, d), Eigen::MatrixXd(m, d),
                 Eigen::MatrixXd::Zero(m, q)};
  for (int l = 0; l < d; ++l) fillComponent(view, w, x, l, t);
  return t;
}

double totalTerms(const ModelView& view, const SubjectTerms& t) {
  double total = t.logf.sum() + copulaLogFactor(view.corrX(), t.y) + t.pseudo.sum() + t.logfe.sum();
  for (Eigen::Index j = 0; j < t.ye.rows(); ++j) total += copulaLogFactor(view.corrEps(), t.ye.row(j).transpose());
  return total;
}

}  // namespace

double Sampler::subjectLogTarget(int i, const Eigen::VectorXd& x) const {
  const ModelView view(st_.params);
  return totalTerms(view, subjectTerms(view, st_.W[i], x));
}

void Sampler::updateIntakes() {
  const int n = data_.numSubjects(), q = data_.q, d = data_.numComponents();
  const double A = hp_.lower, B = hp_.upper;
  const ModelView view(st_.params);
  Eigen::MatrixXi accepted = Eigen::MatrixXi::Zero(n, d);
  forEachIndex(exec_, n, [&](int i) {
    Engine e = subjectEngine(kStepIntakes, i);
    Eigen::VectorXd x = st_.X.row(i).transpose();
    SubjectTerms cur = subjectTerms(view, st_.W[i], x);
    double curTotal = totalTerms(view, cur);
    for (int l = 0; l < d; ++l) {
      const double s = st_.scaleX[l];
      const double old = x[l];
      const double prop = draw::truncatedNormal(e, old, s, A, B);
      const double logU = std::log(draw::uniform(e));
      if (!(prop > A && prop < B)) continue;
      if (l < q && normal::cdf(view.curve(l).h(prop)) < kProbFloor) continue;
      SubjectTerms next = cur;
      x[l] = prop;
      fillComponent(view, st_.W[i], x, l, next);
      const double nextTotal = totalTerms(view, next);
      const double logQ = normal::logMass((A - old) / s, (B - old) / s) - normal::logMass((A - prop) / s, (B - prop) / s);
      if (std::isfinite(nextTotal) && logU < nextTotal - curTotal + logQ) {
        cur = std::move(next);
        curTotal = nextTotal;
        accepted(i, l) = 1;
      } else {
        x[l] = old;
      }
    }
    st_.X.row(i) = x.transpose();
  });
  for (int l = 0; l < d; ++l) record("X[" + std::to_string(l) + "]", n, accepted.col(l).sum());
  refreshDerived();
}

// ------------------------------------------------------------------ step 7: copulas

void Sampler::updateCopulas() {
  const int n = data_.numSubjects(), q = data_.q, d = data_.numComponents();
  const int M = hp_.gridSize;
  ModelParams& pr = st_.params;
  const ModelView view(pr);

  Eigen::MatrixXd scoresX(n, d);
  forEachIndex(exec_, n, [&](int i) {
    for (int l = 0; l < d; ++l) scoresX(i, l) = normalScoreClamped(view.marginalX(l), st_.X(i, l));
  });
  std::vector<int> offset(n + 1, 0);
  for (int i = 0; i < n; ++i) offset[i + 1] = offset[i] + data_.numOccasions(i);
  Eigen::MatrixXd scoresE(offset[n], d);
  forEachIndex(exec_, n, [&](int i) {
    for (int j = 0; j < data_.numOccasions(i); ++j)
      for (int c = 0; c < d; ++c)
        scoresE(offset[i] + j, c) =
            normalScoreClamped(view.errorLaw(c), (st_.W[i](j, q + c) - xt_(i, q + c)) / sd_(i, c));
  });

  Engine eng = globalEngine(kStepCopula);
  auto gridMove = [&](Eigen::VectorXi& bIdx, Eigen::VectorXi& tIdx, Eigen::VectorXd& b, Eigen::VectorXd& th,
                      const Eigen::MatrixXd& scores, const std::string& block) {
    double cur = mvnScoresLogLik(SphericalCorrelation(b, th), scores, exec_);
    long proposed = 0, acc = 0;
    auto tryMove = [&](Eigen::VectorXi& idx, Eigen::VectorXd& vals, int t, bool isB) {
      ++proposed;
      const int move = static_cast<int>(std::floor(3.0 * draw::uniform(eng))) - 1;
      const double logU = std::log(draw::uniform(eng));
      const int next = idx[t] + move;
      if (next < 0 || next >= M) return;
      if (move == 0) {
        ++acc;
        return;
      }
      const double old = vals[t];
      vals[t] = isB ? gridB(next, M) : gridTheta(next, M);
      const double ll = mvnScoresLogLik(SphericalCorrelation(b, th), scores, exec_);
      if (logU < ll - cur) {
        idx[t] = next;
        cur = ll;
        ++acc;
      } else {
        vals[t] = old;
      }
    };
    for (int t = 0; t < b.size(); ++t) tryMove(bIdx, b, t, true);
    for (int s = 0; s < th.size(); ++s) tryMove(tIdx, th, s, false);
    record(block, proposed, acc);
  };
  gridMove(st_.bIdxX, st_.thetaIdxX, pr.bX, pr.thetaX, scoresX, "copulaX");
  gridMove(st_.bIdxEps, st_.thetaIdxEps, pr.bEps, pr.thetaEps, scoresE, "copulaEps");
}

}  // namespace decon
