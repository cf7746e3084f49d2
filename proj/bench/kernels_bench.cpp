// Serial reference versus OpenMP for the index-parallel kernels. Each pair of runs must
// agree bit for bit; the table reports the median wall time of several repetitions.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <omp.h>

#include "decon/kernels.hpp"
#include "decon/sampler.hpp"
#include "decon/simulate.hpp"

using namespace decon;

namespace {

double medianSeconds(const std::function<void()>& fn, int reps) {
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("threads available: %d\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial[s]", "omp[s]", "speedup");

  ScenarioSpec spec = mainScenario(2, 1);
  spec.n = 500;
  spec.seed = 11;
  const GroundTruth gt = generateMain(spec, Exec::Serial);
  const RecallDataset data = scaleRecalls(gt.data);

  Hyperparameters hp;
  hp.iterations = 20;
  hp.burnin = 10;
  hp.thin = 1;
  hp.warmupSweeps = 5;

  // Full sampler sweeps.
  {
    PosteriorDraws a, b;
    const double ts = medianSeconds([&] {
      Sampler s(data, hp, 3, Exec::Serial);
      s.initialize();
      a = s.run();
    }, reps);
    const double tp = medianSeconds([&] {
      Sampler s(data, hp, 3, Exec::Parallel);
      s.initialize();
      b = s.run();
    }, reps);
    bool same = a.draws.size() == b.draws.size();
    for (std::size_t k = 0; same && k < a.draws.size(); ++k) same = a.draws[k].flatten() == b.draws[k].flatten();
    report("sampler (20 sweeps, n=500)", ts, tp, same);
  }

  Sampler s(data, hp, 5, Exec::Serial);
  s.initialize();
  const PosteriorDraws draws = s.run();
  std::vector<ModelView> views;
  for (const auto& m : draws.draws) views.emplace_back(m);

  // Posterior-mean joint density at many points.
  {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Random(2000, 3).array() * 4.0 + 5.0;
    Eigen::VectorXd a, b;
    const double ts = medianSeconds([&] { a = posteriorMeanJoint(views, pts, Exec::Serial); }, reps);
    const double tp = medianSeconds([&] { b = posteriorMeanJoint(views, pts, Exec::Parallel); }, reps);
    report("posterior joint (2000 pts)", ts, tp, a == b);
  }

  // Copula log likelihood of normal scores.
  {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Random(200000, 3);
    const SphericalCorrelation corr(Eigen::Vector2d(0.5, 0.3), Eigen::VectorXd::Constant(1, 0.4));
    double a = 0.0, b = 0.0;
    const double ts = medianSeconds([&] { a = mvnScoresLogLik(corr, scores, Exec::Serial); }, reps);
    const double tp = medianSeconds([&] { b = mvnScoresLogLik(corr, scores, Exec::Parallel); }, reps);
    report("mvn scores (200k rows)", ts, tp, a == b);
  }

  // Data generation.
  {
    ScenarioSpec big = mainScenario(3, 0);
    big.n = 20000;
    GroundTruth a, b;
    const double ts = medianSeconds([&] { a = generateMain(big, Exec::Serial); }, reps);
    const double tp = medianSeconds([&] { b = generateMain(big, Exec::Parallel); }, reps);
    report("generator (n=20000)", ts, tp, a.X == b.X);
  }
  return 0;
}
