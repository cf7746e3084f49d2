#include "decon/normal.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "decon/error.hpp"

namespace decon::normal {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double logPdf(double x) { return -kLogSqrt2Pi - 0.5 * x * x; }

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double logCdf(double x) {
  if (x > -20.0) return std::log(cdf(x));
  // Asymptotic Mills-ratio expansion for the far lower tail.
  const double z2 = 1.0 / (x * x);
  const double series = 1.0 - z2 + 3.0 * z2 * z2 - 15.0 * z2 * z2 * z2;
  return logPdf(x) - std::log(-x) + std::log(series);
}

double quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw argumentError("normal quantile: probability must lie in (0,1)");
  if (u > 0.5) return quantileFromSf(1.0 - u);
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

double quantileFromSf(double s) {
  if (!(s > 0.0 && s < 1.0)) throw argumentError("normal quantile: probability must lie in (0,1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * s);
}

double density(double x, double mean, double var) {
  const double z = (x - mean) / std::sqrt(var);
  return pdf(z) / std::sqrt(var);
}

double logDensity(double x, double mean, double var) {
  const double d = x - mean;
  return -kLogSqrt2Pi - 0.5 * std::log(var) - 0.5 * d * d / var;
}

}  // namespace decon::normal

namespace decon::normal {

double logSf(double x) { return logCdf(-x); }

double logMass(double a, double b) {
  if (!(a < b)) return -std::numeric_limits<double>::infinity();
  if (a >= 0.0) {
    const double la = logSf(a);
    const double lb = std::isinf(b) ? -std::numeric_limits<double>::infinity() : logSf(b);
    return la + std::log1p(-std::exp(lb - la));
  }
  if (b <= 0.0) {
    const double lb = logCdf(b);
    const double la = std::isinf(a) ? -std::numeric_limits<double>::infinity() : logCdf(a);
    return lb + std::log1p(-std::exp(la - lb));
  }
  const double lower = std::isinf(a) ? 0.0 : cdf(a);
  const double upper = std::isinf(b) ? 0.0 : sf(b);
  return std::log1p(-(lower + upper));
}

}  // namespace decon::normal
