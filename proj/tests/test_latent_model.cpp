#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "decon/error.hpp"
#include "decon/latent_model.hpp"
#include "decon/normal.hpp"
#include "support.hpp"

using namespace decon;

namespace {

RecallDataset tinyDataset() {
  RecallDataset d;
  d.q = 1;
  d.p = 1;
  d.names = {"fish", "energy"};
  d.scale = {1.0, 1.0};
  d.subjectIds = {4, 9};
  Eigen::MatrixXd a(3, 2), b(2, 2);
  a << 0, 1200, 250, 900, 500, 1500;
  b << 100, 2000, 0, 1800;
  d.amounts = {a, b};
  return d;
}

// Spline coefficients reproducing x^2 / 9 on the extended equidistant knots.
Eigen::VectorXd quadraticVarianceLog(const SplineBasis& basis) {
  Eigen::VectorXd out(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    const double t1 = basis.lower() + (j - 1) * basis.delta();
    const double t2 = basis.lower() + j * basis.delta();
    out[j] = std::log(t1 * t2 / 9.0);
  }
  return out;
}

}  // namespace

TEST_SUITE("latent-model") {
  TEST_CASE("scaling maps each component maximum to twenty") {
    const RecallDataset raw = tinyDataset();
    const RecallDataset s = scaleRecalls(raw);
    CHECK(s.scale[0] == doctest::Approx(0.04));
    CHECK(s.amounts[0](1, 0) == doctest::Approx(10.0));
    CHECK(s.amounts[0](0, 0) == 0.0);
    CHECK(s.amounts[1](0, 1) == doctest::Approx(20.0));
    CHECK(s.amounts[0](0, 1) / s.amounts[0](1, 1) == doctest::Approx(1200.0 / 900.0));
    const RecallDataset again = scaleRecalls(s);
    CHECK(again.amounts[0](2, 0) == doctest::Approx(s.amounts[0](2, 0)).epsilon(1e-15));
    CHECK(again.scale[0] == doctest::Approx(s.scale[0]).epsilon(1e-15));

    RecallDataset zero = raw;
    for (auto& a : zero.amounts) a.col(0).setZero();
    CHECK_THROWS_AS(scaleRecalls(zero), Error);
  }

  TEST_CASE("dataset validation") {
    RecallDataset d = tinyDataset();
    CHECK_NOTHROW(d.validate());
    d.amounts[1](0, 1) = 0.0;
    CHECK_THROWS_AS(d.validate(), Error);
    d = tinyDataset();
    d.amounts[0](0, 0) = -1.0;
    CHECK_THROWS_AS(d.validate(), Error);
    d = tinyDataset();
    d.names.pop_back();
    CHECK_THROWS_AS(d.validate(), Error);
  }

  TEST_CASE("recall CSV round trip puts episodic columns first") {
    const RecallDataset d = tinyDataset();
    const std::string path = "latent_model_roundtrip.csv";
    {
      std::ofstream out(path);
      out << "subject,occasion,energy,fish\n";
      for (int i = 0; i < d.numSubjects(); ++i)
        for (int j = 0; j < d.numOccasions(i); ++j)
          out << d.subjectIds[i] << ',' << j + 1 << ',' << d.amounts[i](j, 1) << ',' << d.amounts[i](j, 0) << '\n';
    }
    const RecallDataset back = readRecallsCsv(path, {"fish"});
    CHECK(back.names == d.names);
    CHECK(back.subjectIds == d.subjectIds);
    for (int i = 0; i < 2; ++i) CHECK((back.amounts[i] - d.amounts[i]).norm() == 0.0);
    std::ostringstream text;
    writeRecallsCsv(back, text);
    CHECK(text.str().rfind("subject,occasion,fish,energy\n4,1,0,1200\n", 0) == 0);
    CHECK_THROWS_AS(readRecallsCsv(path, {"chips"}), Error);
    std::remove(path.c_str());
  }

  TEST_CASE("surrogate means follow the intake transform") {
    const SplineBasis basis(0.0, 10.0, 12);
    const std::vector<ConsumptionCurve> half{ConsumptionCurve(basis, Eigen::VectorXd::Zero(12))};
    const Eigen::Vector2d x(2.0, 3.5);
    CHECK(surrogateMean(x, half, 0) == 0.0);
    CHECK(surrogateMean(x, half, 1) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(surrogateMean(x, half, 2) == 3.5);
    const Eigen::VectorXd xt = transformIntake(x, half);
    for (int l = 0; l < 3; ++l) CHECK(xt[l] == surrogateMean(x, half, l));
    CHECK(xt[1] * half[0].prob(x[0]) == doctest::Approx(x[0]).epsilon(1e-15));

    const std::vector<ConsumptionCurve> always{ConsumptionCurve(basis, Eigen::VectorXd::Constant(12, 40.0))};
    CHECK(surrogateMean(x, always, 1) == doctest::Approx(2.0).epsilon(1e-15));
  }

  TEST_CASE("consumption probabilities") {
    const SplineBasis basis(0.0, 10.0, 12);
    CHECK(ConsumptionCurve(basis, Eigen::VectorXd::Zero(12)).prob(3.3) == 0.5);
    CHECK(ConsumptionCurve(basis, Eigen::VectorXd::Constant(12, 4.0)).prob(7.0) == doctest::Approx(0.99997).epsilon(1e-5));
    CHECK(ConsumptionCurve(basis, Eigen::VectorXd::Constant(12, 1.5)).prob(1.0) == doctest::Approx(0.9332).epsilon(1e-4));
    CHECK_THROWS_AS(ConsumptionCurve(basis, Eigen::VectorXd::Zero(12)).prob(10.5), Error);
  }

  TEST_CASE("occasion likelihood with independent standard normal errors") {
    const SplineBasis basis(0.0, 10.0, 12);
    ErrorLaw law;
    law.q = 1;
    law.marginals = {std::make_shared<NormalLaw>(), std::make_shared<NormalLaw>()};
    law.variance = {VarianceFunction(basis, Eigen::VectorXd::Constant(12, std::log(4.0))),
                    VarianceFunction(basis, Eigen::VectorXd::Constant(12, std::log(0.25)))};
    law.corr = SphericalCorrelation(2);
    const Eigen::Vector3d xt(0.3, 2.0, 5.0);
    const double expected = 3.0 * normal::logPdf(0.0) - std::log(2.0) - std::log(0.5);
    CHECK(logLikOccasion(xt, xt, law) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("heteroscedastic normal likelihood with s(x) = x/3") {
    const SplineBasis basis(1.0, 10.0, 12);
    const VarianceFunction vf(basis, quadraticVarianceLog(basis));
    for (double x : {1.0, 2.3, 5.0, 9.9}) CHECK(vf.variance(x) == doctest::Approx(x * x / 9.0).epsilon(1e-13));

    ErrorLaw law;
    law.q = 0;
    law.marginals = {std::make_shared<NormalLaw>()};
    law.variance = {vf};
    law.corr = SphericalCorrelation(1);
    for (auto [w, x] : {std::pair{4.0, 3.0}, {2.2, 6.1}, {9.0, 8.5}}) {
      const double s = x / 3.0;
      const double oracle = -0.5 * std::log(2 * M_PI) - std::log(s) - 0.5 * (w - x) * (w - x) / (s * s);
      CHECK(logLikOccasion(Eigen::VectorXd::Constant(1, w), Eigen::VectorXd::Constant(1, x), law) ==
            doctest::Approx(oracle).epsilon(1e-12));
    }
  }

  TEST_CASE("likelihood derivative agrees with a finite difference of the density") {
    const SplineBasis basis(0.0, 10.0, 12);
    ErrorLaw law;
    law.q = 1;
    const RestrictedErrorKernel k1(0.3, 1.0, 0.5, 1.2), k2(0.6, -0.5, 0.8, 0.4);
    auto mix = std::make_shared<ErrorMixture>(Eigen::Vector2d(0.4, 0.6), std::vector<RestrictedErrorKernel>{k1, k2});
    law.marginals = {mix, std::make_shared<NormalLaw>()};
    law.variance = {VarianceFunction(basis, Eigen::VectorXd::LinSpaced(12, -1.0, 1.0)),
                    VarianceFunction(basis, Eigen::VectorXd::Constant(12, 0.2))};
    law.corr = SphericalCorrelation(Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd(0));
    const Eigen::Vector3d xt(0.5, 3.0, 4.0);
    Eigen::Vector3d w(0.1, 3.4, 3.1);
    // Independent evaluation: Gaussian copula density written out with boost's normal law.
    boost::math::normal n01;
    const double s1 = std::sqrt(law.variance[0].variance(xt[1])), s2 = std::sqrt(law.variance[1].variance(xt[2]));
    auto oracle = [&](const Eigen::Vector3d& v) {
      const double e1 = (v[1] - xt[1]) / s1, e2 = (v[2] - xt[2]) / s2;
      const double y1 = boost::math::quantile(n01, mix->cdf(e1)), y2 = e2;
      const double r = 0.4;
      const double cop = std::exp(-(r * r * (y1 * y1 + y2 * y2) - 2 * r * y1 * y2) / (2 * (1 - r * r))) / std::sqrt(1 - r * r);
      return boost::math::pdf(n01, v[0] - xt[0]) * mix->pdf(e1) / s1 * boost::math::pdf(n01, e2) / s2 * cop;
    };
    CHECK(logLikOccasion(w, xt, law) == doctest::Approx(std::log(oracle(w))).epsilon(1e-10));
    const double h = 1e-5;
    for (int l = 0; l < 3; ++l) {
      Eigen::Vector3d up = w, down = w;
      up[l] += h;
      down[l] -= h;
      const double fd = (oracle(up) - oracle(down)) / (2 * h) / oracle(w);
      const double slope = (logLikOccasion(up, xt, law) - logLikOccasion(down, xt, law)) / (2 * h);
      CHECK(slope == doctest::Approx(fd).epsilon(1e-6));
    }
    // Integrating the occasion density over the amount coordinates returns one.
    const double total = testing::integrate(
        [&](double a) {
          return testing::integrate(
              [&](double b) { return std::exp(logLikOccasion(Eigen::Vector3d(0.5, a, b), xt, law)); },
              testing::pieces(-6.0, 14.0, 10), 1e-10);
        },
        testing::pieces(-6.0, 12.0, 10), 1e-9);
    CHECK(total * std::exp(-normal::logPdf(0.0)) == doctest::Approx(1.0).epsilon(1e-6));
  }
}
