#include "decon/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "decon/error.hpp"
#include "decon/normal.hpp"

namespace decon {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ a);
  h = splitmix(h ^ (b + 0x632BE59BD9B4E019ULL));
  h = splitmix(h ^ (c + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

Engine substream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t step, std::uint64_t subject) {
  return Engine(mixSeed(seed, iteration, step, subject));
}

namespace draw {

double uniform(Engine& eng) {
  // 53 random bits mapped to the midpoints of a 2^-53 lattice, so 0 and 1 never occur.
  const std::uint64_t bits = eng() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double standardNormal(Engine& eng) { return normal::quantile(uniform(eng)); }

double normal(Engine& eng, double mean, double sd) { return mean + sd * standardNormal(eng); }

double gamma(Engine& eng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw argumentError("gamma draw: shape and scale must be positive");
  // Marsaglia-Tsang, with the shape<1 boost.
  if (shape < 1.0) {
    const double g = gamma(eng, shape + 1.0, 1.0);
    return scale * g * std::pow(uniform(eng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = standardNormal(eng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform(eng);
    if (u < 1.0 - 0.0331 * z * z * z * z) return scale * d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

double inverseGamma(Engine& eng, double shape, double rate) { return 1.0 / gamma(eng, shape, 1.0 / rate); }

Eigen::VectorXd dirichlet(Engine& eng, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) g[k] = gamma(eng, alpha[k], 1.0);
  const double total = g.sum();
  if (!(total > 0.0)) {
    // Every component underflowed; fall back to the largest alpha.
    g.setZero();
    Eigen::Index best;
    alpha.maxCoeff(&best);
    g[best] = 1.0;
    return g;
  }
  return g / total;
}

int categoricalLog(Engine& eng, const double* logWeights, int count) {
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) top = std::max(top, logWeights[k]);
  if (!std::isfinite(top)) throw numericalError("categorical draw: no finite weight");
  double total = 0.0;
  for (int k = 0; k < count; ++k) total += std::exp(logWeights[k] - top);
  double u = uniform(eng) * total;
  for (int k = 0; k < count; ++k) {
    u -= std::exp(logWeights[k] - top);
    if (u <= 0.0) return k;
  }
  for (int k = count - 1; k >= 0; --k)
    if (std::isfinite(logWeights[k])) return k;
  return count - 1;
}

int categorical(Engine& eng, const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  double u = uniform(eng) * total;
  const int count = static_cast<int>(weights.size());
  for (int k = 0; k < count; ++k) {
    u -= weights[k];
    if (u <= 0.0) return k;
  }
  for (int k = count - 1; k >= 0; --k)
    if (weights[k] > 0.0) return k;
  return count - 1;
}

namespace {

// Standardized draw from N(0,1) restricted to [a, b] with 0 <= a < b.
double upperTail(Engine& eng, double a, double b) {
  const double sa = normal::sf(a);
  const double sb = std::isinf(b) ? 0.0 : normal::sf(b);
  if (sa > 1e-280 && (sa - sb) > 1e-12 * sa) {
    const double s = sb + uniform(eng) * (sa - sb);
    const double x = normal::quantileFromSf(s);
    return std::clamp(x, a, b);
  }
  // Far tail: exponential proposal if the window is wide, uniform proposal otherwise.
  if (b - a > 1.0 / a) {
    const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double x = a - std::log(uniform(eng)) / rate;
      if (x > b) continue;
      const double d = x - rate;
      if (std::log(uniform(eng)) <= -0.5 * d * d) return x;
    }
  }
  for (;;) {
    const double x = a + uniform(eng) * (b - a);
    if (std::log(uniform(eng)) <= -0.5 * (x * x - a * a)) return x;
  }
}

}  // namespace

double truncatedNormal(Engine& eng, double mean, double sd, double lo, double hi) {
  if (!(lo < hi) || !(sd > 0.0)) throw argumentError("truncated normal: empty interval or nonpositive sd");
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double z;
  if (a >= 0.0) {
    z = upperTail(eng, a, b);
  } else if (b <= 0.0) {
    z = -upperTail(eng, -b, -a);
  } else {
    const double pa = std::isinf(a) ? 0.0 : normal::cdf(a);
    const double pb = std::isinf(b) ? 1.0 : normal::cdf(b);
    const double u = pa + uniform(eng) * (pb - pa);
    z = std::clamp(u < 0.5 ? normal::quantile(u) : normal::quantileFromSf(1.0 - u), a, b);
  }
  return std::clamp(mean + sd * z, lo, hi);
}

}  // namespace draw
}  // namespace decon
