// Acceptance checks, one per criterion. Each run prints a single PASS/FAIL line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include "decon/copula.hpp"
#include "decon/densities.hpp"
#include "decon/evaluate.hpp"
#include "decon/normal.hpp"
#include "decon/sampler.hpp"
#include "decon/simulate.hpp"
#include "support.hpp"

using namespace decon;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double secondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------- 1

void correlationRoundTrip(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  Engine eng(20240101);
  double worstFrob = 0.0, worstDet = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int dim = 2 + rep % 5;
    Eigen::VectorXd b(dim - 1), theta(SphericalCorrelation::numAngles(dim));
    for (auto& v : b) v = -0.99 + 1.98 * draw::uniform(eng);
    for (auto& v : theta) v = -M_PI + 2.0 * M_PI * draw::uniform(eng);
    const SphericalCorrelation corr(b, theta);
    const auto [rb, rt] = SphericalCorrelation::recoverParams(corr.matrix());
    worstFrob = std::max(worstFrob, (SphericalCorrelation(rb, rt).matrix() - corr.matrix()).norm());
    double product = 1.0;
    for (double v : b) product *= 1.0 - v * v;
    worstDet = std::max(worstDet, std::abs(corr.matrix().determinant() - product));
  }
  const double elapsed = secondsSince(start);
  out.detail << "max Frobenius error " << worstFrob << ", max det error " << worstDet << ", " << elapsed << " s";
  out.require(worstFrob <= 1e-10, "Frobenius error above 1e-10");
  out.require(worstDet <= 1e-12, "determinant error above 1e-12");
  out.require(elapsed < 5.0, "runtime over 5 s");
}

// ---------------------------------------------------------------- 2

void meanZeroErrors(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  Engine eng(777);
  double worstMean = 0.0, worstIdentity = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int K = 1 + rep % 5;
    std::vector<RestrictedErrorKernel> kernels;
    for (int k = 0; k < K; ++k) {
      const double p = draw::uniform(eng);
      const RestrictedErrorKernel ker(p, draw::normal(eng, 0.0, 2.0), 0.05 + 3.0 * draw::uniform(eng),
                                      0.05 + 3.0 * draw::uniform(eng));
      worstIdentity = std::max(worstIdentity, std::abs(p * ker.mu1() + (1.0 - p) * ker.mu2()));
      kernels.push_back(ker);
    }
    const ErrorMixture mix(draw::dirichlet(eng, Eigen::VectorXd::Ones(K)), kernels);
    const double m = testing::integrate([&](double e) { return e * mix.pdf(e); },
                                        testing::pieces(-40.0 * std::sqrt(mix.variance()), 40.0 * std::sqrt(mix.variance()), 48), 1e-10);
    worstMean = std::max(worstMean, std::abs(m));
  }
  const double elapsed = secondsSince(start);
  out.detail << "max |quadrature mean| " << worstMean << ", max |p mu1 + (1-p) mu2| " << worstIdentity << ", "
             << elapsed << " s";
  out.require(worstMean <= 1e-8, "mixture mean above 1e-8");
  out.require(worstIdentity <= 1e-14, "kernel identity above 1e-14");
  out.require(elapsed < 10.0, "runtime over 10 s");
}

// ---------------------------------------------------------------- 3

void splineNormalization(Outcome& out) {
  const SplineBasis basis(0.0, 10.0, 12);
  Engine eng(31);
  double worstMass = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd xi(12);
    for (auto& v : xi) v = draw::normal(eng, 0.0, 2.0);
    const BsplineDensity dens(basis, xi);
    const double mass = testing::integrate([&](double x) { return dens.pdf(x); }, testing::pieces(0.0, 10.0, 10));
    worstMass = std::max(worstMass, std::abs(mass - 1.0));
  }
  const BsplineDensity flat(basis, Eigen::VectorXd::Constant(12, -1.3));
  double worstFlat = 0.0;
  for (int i = 0; i <= 1000; ++i) worstFlat = std::max(worstFlat, std::abs(flat.pdf(0.01 * i) - 0.1));
  out.detail << "max |integral - 1| " << worstMass << ", max |uniform - 1/10| " << worstFlat;
  out.require(worstMass <= 1e-8, "integral off by more than 1e-8");
  out.require(worstFlat <= 1e-12, "uniform case off by more than 1e-12");
}

// ---------------------------------------------------------------- 4

void simulatorFidelity(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioSpec spec = mainScenario(3, 0);
  spec.n = 10000;
  spec.m = 3;
  spec.seed = 4;
  const GroundTruth gt = generate(spec);
  const double target[3] = {0.20, 0.35, 0.17};
  out.detail << "zero rates";
  for (int l = 0; l < 3; ++l) {
    long zeros = 0, total = 0;
    for (const auto& a : gt.data.amounts)
      for (Eigen::Index j = 0; j < a.rows(); ++j, ++total) zeros += a(j, l) == 0.0;
    const double rate = static_cast<double>(zeros) / total;
    out.detail << ' ' << rate;
    out.require(std::abs(rate - target[l]) <= 0.03, "zero rate of component " + std::to_string(l + 1) + " outside +-3 points");
  }
  const auto& truth = dynamic_cast<const MainTruth&>(*gt.truth);
  std::vector<std::vector<double>> scores(3, std::vector<double>(spec.n));
  for (int i = 0; i < spec.n; ++i)
    for (int l = 0; l < 3; ++l) scores[l][i] = normalScore(truth.marginalLaw(l), gt.X(i, l));
  double worst = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      worst = std::max(worst, std::abs(testing::correlation(scores[a], scores[b]) - spec.corrX(a, b)));
  const double elapsed = secondsSince(start);
  out.detail << "; max score-correlation error " << worst << ", " << elapsed << " s";
  out.require(worst <= 0.02, "normal-score correlation off by more than 0.02");
  out.require(elapsed < 30.0, "runtime over 30 s");
}

// ---------------------------------------------------------------- 5

void lognormalOracle(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioSpec spec = lognormalScenario(2, 1);
  spec.seed = 5;
  const LognormalTruth truth(spec);
  boost::math::lognormal law(spec.muTr[4], std::sqrt(spec.varTr[4]));
  int within = 0;
  double worstZ = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double x = boost::math::quantile(law, 0.01 + 0.98 * k / 49.0);
    const TruthEstimate est = truth.importance({2}, Eigen::VectorXd::Constant(1, x));
    const double z = std::abs(est.value - truth.regularDensity(2, x)) / est.se;
    worstZ = std::max(worstZ, z);
    within += z <= 3.0 && !est.degenerate;
  }
  const double elapsed = secondsSince(start);
  out.detail << within << "/50 points within 3 SE (max " << worstZ << " SE), " << elapsed << " s";
  out.require(within == 50, "importance estimate outside 3 SE");
  out.require(elapsed < 60.0, "runtime over 60 s");
}

// ---------------------------------------------------------------- 6

void conditionalDraws(Outcome& out) {
  // A frozen state from an initialized chain on simulated data.
  ScenarioSpec spec = mainScenario(1, 1);
  spec.n = 200;
  spec.seed = 6;
  const RecallDataset data = scaleRecalls(generate(spec).data);
  Hyperparameters hp;
  hp.warmupSweeps = 10;
  Sampler sampler(data, hp, 6);
  sampler.initialize();
  const ChainState& st = sampler.state();
  const ModelParams& pr = st.params;
  const int n = data.numSubjects(), K = pr.numAtomsX(), draws = 10000;
  std::map<std::string, double> pvals;

  Engine eng(60);
  {
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(K);
    for (int i = 0; i < n; ++i) ++counts[st.labelX(i, 0)];
    std::vector<std::vector<double>> w(K);
    for (int r = 0; r < draws; ++r) {
      const Eigen::VectorXd v = conditional::mixtureWeights(eng, counts, hp.alphaX);
      for (int k = 0; k < K; ++k) w[k].push_back(v[k]);
    }
    const double conc = hp.alphaX / K, total = counts.sum() + hp.alphaX;
    double worst = 1.0;
    for (int k = 0; k < K; ++k) {
      boost::math::beta_distribution<> marg(counts[k] + conc, total - counts[k] - conc);
      worst = std::min(worst, testing::ksTest(w[k], [&](double x) { return boost::math::cdf(marg, x); }) * K);
    }
    pvals["dirichlet"] = std::min(worst, 1.0);
  }
  {
    const double x = st.X(0, 1);
    Eigen::VectorXd terms(K), probs(K);
    for (int k = 0; k < K; ++k) {
      const double s = std::sqrt(pr.varX[k]);
      terms[k] = std::log(pr.piX(0, k)) + normal::logDensity(x, pr.muX[k], pr.varX[k]) -
                 normal::logMass((hp.lower - pr.muX[k]) / s, (hp.upper - pr.muX[k]) / s);
    }
    probs = (terms.array() - terms.maxCoeff()).exp();
    probs /= probs.sum();
    std::vector<long> counts(K, 0);
    for (int r = 0; r < draws; ++r) ++counts[conditional::label(eng, terms)];
    pvals["labels"] = testing::chiSquareTest(counts, std::vector<double>(probs.data(), probs.data() + K));
  }
  const Eigen::MatrixXd P = makePenalty(hp.numBases);
  {
    const Eigen::VectorXd& xi = pr.xi[0];
    std::vector<double> xs(draws);
    for (auto& v : xs) v = conditional::smoothingVariance(eng, xi, P, hp.aXi, hp.bXi);
    boost::math::inverse_gamma_distribution<> ig(hp.aXi + (hp.numBases + 2) / 2.0, hp.bXi + 0.5 * xi.dot(P * xi));
    pvals["smoothing"] = testing::ksTest(xs, [&](double v) { return boost::math::cdf(ig, v); });
  }
  {
    const SplineBasis basis(hp.lower, hp.upper, hp.numBases);
    Eigen::VectorXi reps(n);
    Eigen::VectorXd wSums(n);
    for (int i = 0; i < n; ++i) {
      reps[i] = data.numOccasions(i);
      wSums[i] = st.W[i].col(0).sum();
    }
    const Eigen::VectorXd x = st.X.col(0);
    const auto g = conditional::curveCoefficients(basis, x, reps, wSums, P, st.sig2Beta[0], hp.muBeta0, hp.varBeta0);
    const Eigen::MatrixXd Bd = basis.design(x);
    const Eigen::MatrixXd Q = P / st.sig2Beta[0] + Eigen::MatrixXd::Identity(hp.numBases, hp.numBases) / hp.varBeta0 +
                              Bd.transpose() * reps.cast<double>().asDiagonal() * Bd;
    const Eigen::MatrixXd cov = Q.inverse();
    const Eigen::VectorXd mean = cov * (Eigen::VectorXd::Constant(hp.numBases, hp.muBeta0 / hp.varBeta0) + Bd.transpose() * wSums);
    std::vector<std::vector<double>> cols(hp.numBases);
    for (int r = 0; r < draws; ++r) {
      const Eigen::VectorXd b = conditional::drawGaussian(eng, g);
      for (int k = 0; k < hp.numBases; ++k) cols[k].push_back(b[k]);
    }
    double worst = 1.0;
    for (int k = 0; k < hp.numBases; ++k) {
      boost::math::normal law(mean[k], std::sqrt(cov(k, k)));
      worst = std::min(worst, testing::ksTest(cols[k], [&](double v) { return boost::math::cdf(law, v); }) * hp.numBases);
    }
    pvals["curve"] = std::min(worst, 1.0);
  }
  {
    const ModelView view(pr);
    const double h = view.curve(0).h(st.X(0, 0));
    boost::math::normal n01;
    const double below = boost::math::cdf(n01, -h);
    std::vector<double> pos(draws), neg(draws);
    for (auto& v : pos) v = conditional::pseudoSurrogate(eng, h, true);
    for (auto& v : neg) v = conditional::pseudoSurrogate(eng, h, false);
    const double pPos = testing::ksTest(pos, [&](double w) { return (boost::math::cdf(n01, w - h) - below) / (1.0 - below); });
    const double pNeg = testing::ksTest(neg, [&](double w) { return boost::math::cdf(n01, w - h) / below; });
    pvals["surrogate"] = std::min(1.0, 2.0 * std::min(pPos, pNeg));
  }
  out.detail << "p-values (Bonferroni within step):";
  for (const auto& [name, p] : pvals) {
    out.detail << ' ' << name << '=' << p;
    out.require(p > 0.001, name + " goodness of fit");
  }
}

// ---------------------------------------------------------------- 7

void endToEnd(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioSpec spec = mainScenario(2, 1);
  spec.n = 500;
  spec.m = 3;
  spec.seed = 7;
  const GroundTruth gt = generate(spec);
  const RecallDataset data = scaleRecalls(gt.data);
  Sampler sampler(data, Hyperparameters{}, 7);
  sampler.initialize();
  const PosteriorDraws draws = sampler.run();
  const PosteriorDensity fit(draws);
  const IseReport report = iseReport(
      *gt.truth, [&](int l, double x) { return fit.marginal(l, x); },
      [&](const Eigen::VectorXd& x) { return fit.joint(x); }, gt.X, data.names, Exec::Parallel);
  const double bound[3] = {0.0092, 0.0353, 0.0023};
  out.detail << "ISE";
  for (const auto& row : report.rows) out.detail << ' ' << row.target << '=' << row.ise;
  for (int l = 0; l < 3; ++l) {
    const double ise = report.rows[l + 1].ise;
    out.require(ise <= bound[l], data.names[l] + " ISE above " + std::to_string(bound[l]));
  }
  for (int l = 0; l < 2; ++l) {
    double worst = 0.0;
    for (int k = 0; k <= 90; ++k) {
      const double x = 0.5 + 0.05 * k;
      worst = std::max(worst, std::abs(fit.consumptionProb(l, x) - gt.truth->consumptionProb(l, x)));
    }
    out.detail << "; max |P error| " << data.names[l] << '=' << worst;
    out.require(worst <= 0.15, data.names[l] + " probability curve off by more than 0.15");
  }
  out.detail << "; fitted support upper bound in raw units";
  for (int l = 0; l < 3; ++l) out.detail << ' ' << fit.upper() / data.scale[l];
  out.detail << "; " << secondsSince(start) << " s";
}

// ---------------------------------------------------------------- 8

void energyAdjusted(Outcome& out) {
  const double sigma = 0.5;
  boost::math::lognormal each(0.0, sigma), ratio(0.0, std::sqrt(2.0) * sigma);
  auto joint = [&](double a, double b) {
    return (a > 0.0 && b > 0.0) ? boost::math::pdf(each, a) * boost::math::pdf(each, b) : 0.0;
  };
  const Eigen::VectorXd z = linspace(0.02, 5.0, 100);
  const Eigen::VectorXd fz = energyAdjustedDensity(joint, z, 0.0, 60.0, std::numeric_limits<double>::infinity(), Exec::Parallel);
  double sup = 0.0;
  for (int k = 0; k < z.size(); ++k) sup = std::max(sup, std::abs(fz[k] - boost::math::pdf(ratio, z[k])));
  out.detail << "lognormal ratio sup error " << sup;
  out.require(sup <= 1e-4, "sup-norm error above 1e-4");

  // Exported ratio densities from a short fit on the mixed design.
  ScenarioSpec spec = mainScenario(2, 1);
  spec.n = 200;
  spec.seed = 8;
  const RecallDataset data = scaleRecalls(generate(spec).data);
  Hyperparameters hp;
  hp.iterations = 60;
  hp.burnin = 40;
  hp.thin = 5;
  hp.warmupSweeps = 20;
  Sampler sampler(data, hp, 8);
  sampler.initialize();
  const PosteriorDensity fit(sampler.run());
  out.detail << "; exported masses";
  for (int a = 0; a < 2; ++a) {
    const DensityGrid g = energyAdjustedCovering(fit, a, 2, 2.0, 401, Exec::Parallel);
    const double mass = gridIntegral(toRawUnits(g));
    out.detail << ' ' << mass;
    out.require(std::abs(mass - 1.0) <= 1e-3, "exported ratio density mass off by more than 1e-3");
  }
}

// ---------------------------------------------------------------- 9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(Outcome& out, const std::string& cli) {
  if (cli.empty()) {
    out.require(false, "no CLI path given (--cli)");
    return;
  }
  const fs::path root = fs::temp_directory_path() / ("decon-acceptance-" + std::to_string(::getpid()));
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = root / ("run" + std::to_string(run));
    fs::create_directories(dir);
    std::ofstream(dir / "sim.json") << R"({"seed": 9, "output": "out", "scenario": {"kind": "main", "q": 2, "p": 1, "n": 150, "m": 3}})";
    std::ofstream(dir / "fit.json")
        << R"({"seed": 9, "output": "out", "fit": {"data": "out/recalls.csv", "episodic": ["episodic_1", "episodic_2"],)"
        << R"( "hyper": {"iterations": 60, "burnin": 30, "thin": 3, "warmup_sweeps": 10}}})";
    std::ofstream(dir / "eval.json") << R"({"output": "out", "evaluate": {"draws": "out/draws.csv", "truth": "out/truth.csv"}})";
    for (const char* step : {"simulate sim.json", "fit fit.json", "evaluate eval.json"}) {
      std::string cmd(step);
      const auto space = cmd.find(' ');
      const std::string line = "cd \"" + dir.string() + "\" && \"" + cli + "\" " + cmd.substr(0, space) + " --config " +
                               cmd.substr(space + 1) + " > /dev/null 2>&1";
      const int rc = std::system(line.c_str());
      out.require(rc == 0, std::string("command failed: ") + step);
    }
    std::map<std::string, std::string> files;
    if (fs::exists(dir / "out"))
      for (const auto& e : fs::directory_iterator(dir / "out")) files[e.path().filename().string()] = slurp(e.path());
    runs.push_back(std::move(files));
  }
  fs::remove_all(root);
  out.detail << runs[0].size() << " files per run";
  out.require(runs[0].size() >= 6, "expected outputs missing");
  out.require(runs[0].size() == runs[1].size(), "runs wrote different file sets");
  int differing = 0;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) {
      ++differing;
      out.detail << " (differs: " << name << ")";
    }
  }
  out.require(differing == 0, "outputs differ between runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int criterion = 0;
  std::string cli;
  app.add_option("--criterion", criterion, "Criterion number (1-9)")->required()->check(CLI::Range(1, 9));
  app.add_option("--cli", cli, "Path to the decon executable (criterion 9)");
  CLI11_PARSE(app, argc, argv);

  Outcome out;
  try {
    switch (criterion) {
      case 1: correlationRoundTrip(out); break;
      case 2: meanZeroErrors(out); break;
      case 3: splineNormalization(out); break;
      case 4: simulatorFidelity(out); break;
      case 5: lognormalOracle(out); break;
      case 6: conditionalDraws(out); break;
      case 7: endToEnd(out); break;
      case 8: energyAdjusted(out); break;
      case 9: determinism(out, cli); break;
    }
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  std::cout << "criterion " << criterion << ": " << (out.pass ? "PASS" : "FAIL") << " | " << out.detail.str() << std::endl;
  return out.pass ? 0 : 1;
}
