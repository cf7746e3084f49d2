#include "decon/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "decon/error.hpp"
#include "decon/normal.hpp"

namespace decon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double Univariate::logPdf(double x) const {
  const double f = pdf(x);
  return f > 0.0 ? std::log(f) : -kInf;
}

void Univariate::bracket(double u, double& lo, double& hi) const {
  lo = lower();
  hi = upper();
  if (std::isinf(lo)) {
    lo = std::isinf(hi) ? -1.0 : hi - 1.0;
    double step = 1.0;
    while (cdf(lo) >= u && step < 1e300) {
      lo -= step;
      step *= 2.0;
    }
  }
  if (std::isinf(hi)) {
    hi = lo + 1.0;
    double step = 1.0;
    while (sf(hi) > 1.0 - u && step < 1e300) {
      hi += step;
      step *= 2.0;
    }
  }
}

double Univariate::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw argumentError("quantile: probability must lie in (0,1)");
  double lo, hi;
  bracket(u, lo, hi);
  const bool upperHalf = u > 0.5;
  const double target = upperHalf ? 1.0 - u : u;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) break;
    const bool below = upperHalf ? sf(mid) > target : cdf(mid) < target;
    if (below)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double Univariate::sample(Engine& eng) const { return quantile(draw::uniform(eng)); }

double normalScore(const Univariate& dist, double x) {
  const double f = dist.cdf(x);
  if (f < 0.5) {
    if (!(f > 0.0)) throw numericalError("normal score: point at the lower edge of the support");
    return normal::quantile(f);
  }
  const double s = dist.sf(x);
  if (!(s > 0.0)) throw numericalError("normal score: point at the upper edge of the support");
  return normal::quantileFromSf(s);
}

double normalScoreClamped(const Univariate& dist, double x, double limit) {
  const double f = dist.cdf(x);
  if (f < 0.5) return f > 0.0 ? std::max(normal::quantile(f), -limit) : -limit;
  const double s = dist.sf(x);
  return s > 0.0 ? std::min(normal::quantileFromSf(s), limit) : limit;
}

double truncNormLogPdf(double x, double mean, double var, double lo, double hi) {
  if (x < lo || x > hi) return -kInf;
  const double sd = std::sqrt(var);
  return normal::logDensity(x, mean, var) - normal::logMass((lo - mean) / sd, (hi - mean) / sd);
}

double truncNormCdf(double x, double mean, double var, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double sd = std::sqrt(var);
  const double a = (lo - mean) / sd, b = (hi - mean) / sd, z = (x - mean) / sd;
  return std::exp(normal::logMass(a, z) - normal::logMass(a, b));
}

double truncNormSf(double x, double mean, double var, double lo, double hi) {
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  const double sd = std::sqrt(var);
  const double a = (lo - mean) / sd, b = (hi - mean) / sd, z = (x - mean) / sd;
  return std::exp(normal::logMass(z, b) - normal::logMass(a, b));
}

// ---------------------------------------------------------------- TN mixture

TruncNormMixture::TruncNormMixture(Eigen::VectorXd weights, Eigen::VectorXd means, Eigen::VectorXd vars, double lo,
                                   double hi)
    : weights_(std::move(weights)), means_(std::move(means)), vars_(std::move(vars)), lo_(lo), hi_(hi) {
  if (!(hi > lo)) throw argumentError("truncated normal mixture: B must exceed A");
  if (weights_.size() != means_.size() || weights_.size() != vars_.size())
    throw argumentError("truncated normal mixture: parameter lengths differ");
  if ((vars_.array() <= 0.0).any()) throw argumentError("truncated normal mixture: variances must be positive");
  sds_ = vars_.cwiseSqrt();
  logMass_.resize(weights_.size());
  for (Eigen::Index k = 0; k < weights_.size(); ++k)
    logMass_[k] = normal::logMass((lo_ - means_[k]) / sds_[k], (hi_ - means_[k]) / sds_[k]);
}

double TruncNormMixture::pdf(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  double f = 0.0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    if (weights_[k] <= 0.0) continue;
    f += weights_[k] * std::exp(normal::logDensity(x, means_[k], vars_[k]) - logMass_[k]);
  }
  return f;
}

double TruncNormMixture::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  double f = 0.0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    if (weights_[k] <= 0.0) continue;
    f += weights_[k] * std::exp(normal::logMass((lo_ - means_[k]) / sds_[k], (x - means_[k]) / sds_[k]) - logMass_[k]);
  }
  return std::min(f, 1.0);
}

double TruncNormMixture::sf(double x) const {
  if (x <= lo_) return 1.0;
  if (x >= hi_) return 0.0;
  double s = 0.0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    if (weights_[k] <= 0.0) continue;
    s += weights_[k] * std::exp(normal::logMass((x - means_[k]) / sds_[k], (hi_ - means_[k]) / sds_[k]) - logMass_[k]);
  }
  return std::min(s, 1.0);
}

double TruncNormMixture::sample(Engine& eng) const {
  const int k = draw::categorical(eng, weights_);
  return draw::truncatedNormal(eng, means_[k], sds_[k], lo_, hi_);
}

// ---------------------------------------------------------------- B-spline density

BsplineDensity::BsplineDensity(SplineBasis basis, Eigen::VectorXd logCoef)
    : basis_(std::move(basis)), logCoef_(std::move(logCoef)) {
  if (logCoef_.size() != basis_.size()) throw argumentError("B-spline density: coefficient length must equal J");
  const double top = logCoef_.maxCoeff();
  const Eigen::VectorXd e = (logCoef_.array() - top).exp();
  const double scaled = basis_.areas().dot(e);
  normalizer_ = scaled * std::exp(top);
  coef_ = e / scaled;
}

double BsplineDensity::pdf(double x) const {
  if (!basis_.contains(x)) return 0.0;
  return basis_.combine(x, coef_);
}

double BsplineDensity::cdf(double x) const {
  if (x <= basis_.lower()) return 0.0;
  if (x >= basis_.upper()) return 1.0;
  return std::clamp(basis_.integralTo(x).dot(coef_), 0.0, 1.0);
}

// ---------------------------------------------------------------- restricted kernel

RestrictedErrorKernel::RestrictedErrorKernel(double p, double muTilde, double var1, double var2)
    : p_(p), muTilde_(muTilde), var1_(var1), var2_(var2) {
  if (!(p >= 0.0 && p <= 1.0)) throw argumentError("error kernel: p must lie in [0,1]");
  if (!(var1 > 0.0) || !(var2 > 0.0)) throw argumentError("error kernel: variances must be positive");
  const double norm = std::sqrt(p * p + (1.0 - p) * (1.0 - p));
  c1_ = (1.0 - p) / norm;
  c2_ = -p / norm;
}

double RestrictedErrorKernel::variance() const {
  const double m1 = mu1(), m2 = mu2();
  return p_ * (var1_ + m1 * m1) + (1.0 - p_) * (var2_ + m2 * m2);
}

double RestrictedErrorKernel::componentPdf(int t, double x) const {
  return t == 0 ? normal::density(x, mu1(), var1_) : normal::density(x, mu2(), var2_);
}

double RestrictedErrorKernel::pdf(double x) const {
  return p_ * normal::density(x, mu1(), var1_) + (1.0 - p_) * normal::density(x, mu2(), var2_);
}

double RestrictedErrorKernel::logPdf(double x) const {
  const double a = p_ > 0.0 ? std::log(p_) + normal::logDensity(x, mu1(), var1_) : -kInf;
  const double b = p_ < 1.0 ? std::log1p(-p_) + normal::logDensity(x, mu2(), var2_) : -kInf;
  const double top = std::max(a, b);
  if (std::isinf(top)) return top;
  return top + std::log(std::exp(a - top) + std::exp(b - top));
}

double RestrictedErrorKernel::cdf(double x) const {
  return p_ * normal::cdf((x - mu1()) / std::sqrt(var1_)) + (1.0 - p_) * normal::cdf((x - mu2()) / std::sqrt(var2_));
}

double RestrictedErrorKernel::sf(double x) const {
  return p_ * normal::sf((x - mu1()) / std::sqrt(var1_)) + (1.0 - p_) * normal::sf((x - mu2()) / std::sqrt(var2_));
}

double RestrictedErrorKernel::lower() const { return -kInf; }
double RestrictedErrorKernel::upper() const { return kInf; }

double RestrictedErrorKernel::sample(Engine& eng) const {
  if (draw::uniform(eng) < p_) return draw::normal(eng, mu1(), std::sqrt(var1_));
  return draw::normal(eng, mu2(), std::sqrt(var2_));
}

// ---------------------------------------------------------------- error mixture

ErrorMixture::ErrorMixture(Eigen::VectorXd weights, std::vector<RestrictedErrorKernel> kernels)
    : weights_(std::move(weights)), kernels_(std::move(kernels)) {
  if (static_cast<std::size_t>(weights_.size()) != kernels_.size())
    throw argumentError("error mixture: weight and kernel counts differ");
}

double ErrorMixture::pdf(double x) const {
  double f = 0.0;
  for (std::size_t k = 0; k < kernels_.size(); ++k)
    if (weights_[k] > 0.0) f += weights_[k] * kernels_[k].pdf(x);
  return f;
}

double ErrorMixture::logPdf(double x) const {
  const double f = pdf(x);
  if (f > 1e-280) return std::log(f);
  double top = -kInf;
  for (std::size_t k = 0; k < kernels_.size(); ++k)
    if (weights_[k] > 0.0) top = std::max(top, std::log(weights_[k]) + kernels_[k].logPdf(x));
  if (std::isinf(top)) return top;
  double total = 0.0;
  for (std::size_t k = 0; k < kernels_.size(); ++k)
    if (weights_[k] > 0.0) total += std::exp(std::log(weights_[k]) + kernels_[k].logPdf(x) - top);
  return top + std::log(total);
}

double ErrorMixture::cdf(double x) const {
  double f = 0.0;
  for (std::size_t k = 0; k < kernels_.size(); ++k)
    if (weights_[k] > 0.0) f += weights_[k] * kernels_[k].cdf(x);
  return std::min(f, 1.0);
}

double ErrorMixture::sf(double x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < kernels_.size(); ++k)
    if (weights_[k] > 0.0) s += weights_[k] * kernels_[k].sf(x);
  return std::min(s, 1.0);
}

double ErrorMixture::lower() const { return -kInf; }
double ErrorMixture::upper() const { return kInf; }

double ErrorMixture::sample(Engine& eng) const { return kernels_[draw::categorical(eng, weights_)].sample(eng); }

double ErrorMixture::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    const auto& ker = kernels_[k];
    m += weights_[k] * (ker.p() * ker.mu1() + (1.0 - ker.p()) * ker.mu2());
  }
  return m;
}

double ErrorMixture::variance() const {
  double v = 0.0;
  for (std::size_t k = 0; k < kernels_.size(); ++k) v += weights_[k] * kernels_[k].variance();
  const double m = mean();
  return v - m * m;
}

ErrorMixture ErrorMixture::rescaled(double scale) const {
  std::vector<RestrictedErrorKernel> out;
  out.reserve(kernels_.size());
  for (const auto& k : kernels_)
    out.emplace_back(k.p(), k.muTilde() / scale, k.var1() / (scale * scale), k.var2() / (scale * scale));
  return ErrorMixture(weights_, std::move(out));
}

// ---------------------------------------------------------------- Laplace mixture

ScaledLaplaceMixture::ScaledLaplaceMixture(Eigen::VectorXd weights, Eigen::VectorXd locations, Eigen::VectorXd scales)
    : weights_(std::move(weights)), locations_(std::move(locations)), scales_(std::move(scales)) {
  if (weights_.size() != locations_.size() || weights_.size() != scales_.size())
    throw argumentError("Laplace mixture: parameter lengths differ");
  if ((scales_.array() <= 0.0).any()) throw argumentError("Laplace mixture: scales must be positive");
  shift_ = weights_.dot(locations_);
  const double second = (weights_.array() * (2.0 * scales_.array().square() + locations_.array().square())).sum();
  scale_ = std::sqrt(second - shift_ * shift_);
}

double ScaledLaplaceMixture::rawPdf(double y) const {
  double f = 0.0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k)
    f += weights_[k] * std::exp(-std::abs(y - locations_[k]) / scales_[k]) / (2.0 * scales_[k]);
  return f;
}

double ScaledLaplaceMixture::rawCdf(double y) const {
  double f = 0.0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    const double d = (y - locations_[k]) / scales_[k];
    f += weights_[k] * (d < 0.0 ? 0.5 * std::exp(d) : 1.0 - 0.5 * std::exp(-d));
  }
  return f;
}

double ScaledLaplaceMixture::rawSf(double y) const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    const double d = (y - locations_[k]) / scales_[k];
    s += weights_[k] * (d > 0.0 ? 0.5 * std::exp(-d) : 1.0 - 0.5 * std::exp(d));
  }
  return s;
}

double ScaledLaplaceMixture::pdf(double x) const { return scale_ * rawPdf(shift_ + scale_ * x); }
double ScaledLaplaceMixture::cdf(double x) const { return rawCdf(shift_ + scale_ * x); }
double ScaledLaplaceMixture::sf(double x) const { return rawSf(shift_ + scale_ * x); }
double ScaledLaplaceMixture::lower() const { return -kInf; }
double ScaledLaplaceMixture::upper() const { return kInf; }

double ScaledLaplaceMixture::sample(Engine& eng) const {
  const int k = draw::categorical(eng, weights_);
  const double u = draw::uniform(eng);
  const double y = u < 0.5 ? locations_[k] + scales_[k] * std::log(2.0 * u)
                           : locations_[k] - scales_[k] * std::log(2.0 * (1.0 - u));
  return (y - shift_) / scale_;
}

// ---------------------------------------------------------------- normal

double NormalLaw::pdf(double x) const { return normal::pdf((x - mean_) / sd_) / sd_; }
double NormalLaw::logPdf(double x) const { return normal::logPdf((x - mean_) / sd_) - std::log(sd_); }
double NormalLaw::cdf(double x) const { return normal::cdf((x - mean_) / sd_); }
double NormalLaw::sf(double x) const { return normal::sf((x - mean_) / sd_); }
double NormalLaw::quantile(double u) const { return mean_ + sd_ * normal::quantile(u); }
double NormalLaw::lower() const { return -kInf; }
double NormalLaw::upper() const { return kInf; }

}  // namespace decon
