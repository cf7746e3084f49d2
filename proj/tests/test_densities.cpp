#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/normal.hpp>

#include "decon/densities.hpp"
#include "decon/error.hpp"
#include "decon/rng.hpp"
#include "support.hpp"

using namespace decon;

namespace {

TruncNormMixture sampleMixture() {
  return TruncNormMixture(Eigen::Vector3d(0.25, 0.5, 0.25), Eigen::Vector3d(-0.5, 3.0, 6.5), Eigen::Vector3d(0.5, 1.2, 0.3),
                          0.0, 6.0);
}

ErrorMixture randomErrorMixture(Engine& eng, int k) {
  std::vector<RestrictedErrorKernel> kernels;
  Eigen::VectorXd alpha = Eigen::VectorXd::Ones(k);
  for (int i = 0; i < k; ++i) {
    const double p = draw::uniform(eng);
    const double mu = draw::normal(eng, 0.0, 2.0);
    kernels.emplace_back(p, mu, 0.1 + 2.0 * draw::uniform(eng), 0.1 + 2.0 * draw::uniform(eng));
  }
  return ErrorMixture(draw::dirichlet(eng, alpha), kernels);
}

double quadMoment(const Univariate& d, int power, double lo, double hi) {
  return testing::integrate([&](double x) { return std::pow(x, power) * d.pdf(x); }, testing::pieces(lo, hi, 80), 1e-14);
}

}  // namespace

TEST_SUITE("densities") {
  TEST_CASE("truncated normal mixture matches a direct normal-law oracle") {
    const auto mix = sampleMixture();
    boost::math::normal n0(-0.5, std::sqrt(0.5)), n1(3.0, std::sqrt(1.2)), n2(6.5, std::sqrt(0.3));
    auto piece = [&](const boost::math::normal& n, double x) {
      return boost::math::pdf(n, x) / (boost::math::cdf(n, 6.0) - boost::math::cdf(n, 0.0));
    };
    for (double x : {0.0, 0.01, 1.3, 3.0, 5.7, 6.0}) {
      const double oracle = 0.25 * piece(n0, x) + 0.5 * piece(n1, x) + 0.25 * piece(n2, x);
      CHECK(mix.pdf(x) == doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK(mix.pdf(-0.01) == 0.0);
    CHECK(mix.pdf(6.01) == 0.0);
    CHECK(std::abs(testing::integrate([&](double x) { return mix.pdf(x); }, testing::pieces(0, 6, 12)) - 1.0) <= 1e-8);
    CHECK(mix.cdf(0.0) == 0.0);
    CHECK(mix.cdf(6.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (double x : {0.5, 2.0, 4.4}) {
      const double area = testing::integrate([&](double s) { return mix.pdf(s); }, testing::pieces(0, x, 8));
      CHECK(mix.cdf(x) == doctest::Approx(area).epsilon(1e-10));
    }
  }

  TEST_CASE("quantile inverts the distribution function on the interior") {
    const auto mix = sampleMixture();
    for (int i = 1; i < 60; ++i) {
      const double x = 6.0 * i / 60.0;
      CHECK(std::abs(mix.quantile(mix.cdf(x)) - x) <= 1e-8);
    }
    Engine eng(5);
    const auto err = randomErrorMixture(eng, 3);
    for (double x : {-3.0, -0.4, 0.0, 1.1, 2.5}) CHECK(std::abs(err.quantile(err.cdf(x)) - x) <= 1e-8);
    const ScaledLaplaceMixture lap(Eigen::Vector3d(0.3, 0.4, 0.3), Eigen::Vector3d(-1.0, 0.0, 2.0), Eigen::Vector3d(1, 2, 0.5));
    for (double x : {-4.0, -0.4, 0.0, 1.1, 3.5}) CHECK(std::abs(lap.quantile(lap.cdf(x)) - x) <= 1e-8);
    CHECK_THROWS_AS(mix.quantile(0.0), Error);
    CHECK_THROWS_AS(mix.quantile(1.0), Error);
    CHECK_THROWS_AS(mix.quantile(1.5), Error);
  }

  TEST_CASE("B-spline density normalization") {
    const SplineBasis basis(0.0, 10.0, 12);
    const BsplineDensity flat(basis, Eigen::VectorXd::Constant(12, 0.7));
    for (int i = 0; i <= 100; ++i) CHECK(std::abs(flat.pdf(0.1 * i) - 0.1) <= 1e-12);
    Engine eng(8);
    for (int r = 0; r < 10; ++r) {
      Eigen::VectorXd xi(12);
      for (int j = 0; j < 12; ++j) xi[j] = draw::normal(eng, 0.0, 1.5);
      const BsplineDensity dens(basis, xi);
      CHECK(std::abs(testing::integrate([&](double x) { return dens.pdf(x); }, testing::pieces(0, 10, 10)) - 1.0) <= 1e-8);
      CHECK(dens.cdf(10.0) == doctest::Approx(1.0).epsilon(1e-14));
      for (double x : {1.0, 4.5, 7.7}) CHECK(std::abs(dens.quantile(dens.cdf(x)) - x) <= 1e-8);
    }
  }

  TEST_CASE("restricted kernel constants and special cases") {
    const RestrictedErrorKernel k(0.4, 2.0, 1.0, 1.0);
    CHECK(k.c1() == doctest::Approx(0.832050).epsilon(1e-6));
    CHECK(k.c2() == doctest::Approx(-0.554700).epsilon(1e-6));
    CHECK(std::abs(0.4 * k.mu1() + 0.6 * k.mu2()) <= 1e-14);

    const RestrictedErrorKernel std(0.5, 0.0, 1.0, 1.0);
    CHECK(std.pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    const RestrictedErrorKernel sym(0.5, 1.7, 0.8, 0.8);
    for (double x : {0.3, 1.0, 2.9}) CHECK(sym.pdf(x) == doctest::Approx(sym.pdf(-x)).epsilon(1e-13));
    const RestrictedErrorKernel one(1.0, 3.3, 0.5, 2.0);
    CHECK(one.mu1() == 0.0);

    Engine eng(21);
    for (int r = 0; r < 1000; ++r) {
      const double p = draw::uniform(eng);
      const RestrictedErrorKernel kr(p, draw::normal(eng, 0.0, 3.0), 1.0, 1.0);
      CHECK(std::abs(p * kr.mu1() + (1 - p) * kr.mu2()) <= 1e-14);
    }
  }

  TEST_CASE("error mixtures have mean zero and the stated variance") {
    Engine eng(99);
    for (int r = 0; r < 200; ++r) {
      const auto mix = randomErrorMixture(eng, 1 + r % 4);
      CHECK(std::abs(mix.mean()) <= 1e-12);
    }
    for (int r = 0; r < 5; ++r) {
      const auto mix = randomErrorMixture(eng, 3);
      const double reach = 40.0 * std::sqrt(mix.variance()), lo = -reach, hi = reach;
      CHECK(std::abs(quadMoment(mix, 0, lo, hi) - 1.0) <= 1e-8);
      CHECK(std::abs(quadMoment(mix, 1, lo, hi)) <= 1e-8);
      CHECK(quadMoment(mix, 2, lo, hi) == doctest::Approx(mix.variance()).epsilon(1e-8));
      const auto unit = mix.rescaled(std::sqrt(mix.variance()));
      CHECK(unit.variance() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(unit.pdf(0.3) == doctest::Approx(std::sqrt(mix.variance()) * mix.pdf(0.3 * std::sqrt(mix.variance()))));
    }
  }

  TEST_CASE("standardized Laplace mixture") {
    const ScaledLaplaceMixture lap(Eigen::Vector3d(0.2, 0.5, 0.3), Eigen::Vector3d(-1.0, 0.5, 2.0), Eigen::Vector3d(0.5, 2.0, 1.0));
    const double lo = -60.0, hi = 60.0;
    CHECK(std::abs(quadMoment(lap, 0, lo, hi) - 1.0) <= 1e-8);
    CHECK(std::abs(quadMoment(lap, 1, lo, hi)) <= 1e-10);
    CHECK(std::abs(quadMoment(lap, 2, lo, hi) - 1.0) <= 1e-8);

    // Single component: standardized Laplace(0, b) is Laplace(0, 1/sqrt 2).
    const ScaledLaplaceMixture single(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0));
    boost::math::laplace oracle(0.0, 1.0 / std::sqrt(2.0));
    for (double x : {-2.0, -0.1, 0.0, 0.7, 3.0}) {
      CHECK(single.pdf(x) == doctest::Approx(boost::math::pdf(oracle, x)).epsilon(1e-13));
      CHECK(single.cdf(x) == doctest::Approx(boost::math::cdf(oracle, x)).epsilon(1e-13));
    }
  }

  TEST_CASE("sampling agrees with the distribution functions") {
    const int n = 100000;
    auto check = [&](const Univariate& d, std::uint64_t seed) {
      Engine eng(seed);
      std::vector<double> xs(n);
      for (auto& x : xs) x = d.sample(eng);
      CHECK(testing::ksTest(xs, [&](double x) { return d.cdf(x); }) > 0.001);
      return xs;
    };
    const auto mix = sampleMixture();
    const auto tn = check(mix, 1);
    CHECK(*std::min_element(tn.begin(), tn.end()) >= 0.0);
    CHECK(*std::max_element(tn.begin(), tn.end()) <= 6.0);

    const RestrictedErrorKernel k(0.3, 1.5, 0.4, 1.3);
    const auto ks = check(k, 2);
    CHECK(std::abs(testing::mean(ks)) <= 4.0 * std::sqrt(k.variance() / n));

    Engine eng(3);
    check(randomErrorMixture(eng, 3), 4);
    check(ScaledLaplaceMixture(Eigen::Vector3d(0.2, 0.5, 0.3), Eigen::Vector3d(-1.0, 0.5, 2.0), Eigen::Vector3d(0.5, 2.0, 1.0)), 5);
    const BsplineDensity flat(SplineBasis(0.0, 10.0, 12), Eigen::VectorXd::Zero(12));
    std::vector<double> us(n);
    Engine e6(6);
    for (auto& x : us) x = flat.sample(e6);
    CHECK(testing::ksTest(us, [](double x) { return x / 10.0; }) > 0.001);
  }

  TEST_CASE("normal scores from either tail") {
    const NormalLaw n01;
    CHECK(normalScore(n01, 1.3) == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(normalScore(n01, -30.0) == doctest::Approx(-30.0).epsilon(1e-9));
    CHECK(normalScore(n01, 30.0) == doctest::Approx(30.0).epsilon(1e-9));
    const auto mix = sampleMixture();
    CHECK_THROWS_AS(normalScore(mix, 0.0), Error);
    CHECK(normalScoreClamped(mix, 0.0) == -37.0);
    CHECK(normalScoreClamped(mix, 6.0) == 37.0);
  }

  TEST_CASE("malformed parameters are rejected") {
    CHECK_THROWS_AS(TruncNormMixture(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 2), Eigen::Vector2d(1, -1), 0, 1), Error);
    CHECK_THROWS_AS(TruncNormMixture(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 1), 1, 1), Error);
    CHECK_THROWS_AS(RestrictedErrorKernel(1.2, 0.0, 1.0, 1.0), Error);
    CHECK_THROWS_AS(RestrictedErrorKernel(0.5, 0.0, 0.0, 1.0), Error);
    CHECK_THROWS_AS(ScaledLaplaceMixture(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)), Error);
  }
}
