#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace testing {

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a continuous cdf.
inline double ksStatistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Asymptotic Kolmogorov tail probability with Stephens' small-sample correction.
inline double ksPValue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

inline double ksTest(const std::vector<double>& xs, const std::function<double(double)>& cdf) {
  return ksPValue(ksStatistic(xs, cdf), xs.size());
}

/// Pearson chi-square goodness of fit of observed counts against cell probabilities.
inline double chiSquareTest(const std::vector<long>& observed, const std::vector<double>& probs) {
  long total = 0;
  for (long c : observed) total += c;
  double stat = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    const double e = total * probs[k];
    stat += (observed[k] - e) * (observed[k] - e) / e;
    ++cells;
  }
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Adaptive Gauss-Kronrod integral split at the given breakpoints, at most 2^12 cuts per piece.
inline double integrate(const std::function<double(double)>& f, std::vector<double> breaks, double tol = 1e-13) {
  using boost::math::quadrature::gauss_kronrod;
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    total += gauss_kronrod<double, 61>::integrate(f, breaks[i], breaks[i + 1], 12, tol);
  }
  return total;
}

/// Evenly spaced breakpoints over [lo, hi].
inline std::vector<double> pieces(double lo, double hi, int count) {
  std::vector<double> out(count + 1);
  for (int i = 0; i <= count; ++i) out[i] = lo + (hi - lo) * i / count;
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace testing
