#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace decon {

using Engine = std::mt19937_64;

/// Deterministic 64-bit mixing of a seed with up to three stream coordinates.
std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// An engine keyed by (seed, iteration, step, subject). Draws made from it do not
/// depend on how work is split across threads.
Engine substream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t step, std::uint64_t subject);

namespace draw {

/// Uniform on the open interval (0,1).
double uniform(Engine& eng);
double standardNormal(Engine& eng);
double normal(Engine& eng, double mean, double sd);
double gamma(Engine& eng, double shape, double scale);
/// Inverse gamma with density proportional to x^{-shape-1} exp(-rate/x).
double inverseGamma(Engine& eng, double shape, double rate);
Eigen::VectorXd dirichlet(Engine& eng, const Eigen::VectorXd& alpha);
/// Category index drawn with probabilities proportional to exp(logWeights).
int categoricalLog(Engine& eng, const double* logWeights, int count);
int categorical(Engine& eng, const Eigen::VectorXd& weights);

/// Normal(mean, sd^2) restricted to [lo, hi]; lo/hi may be infinite.
double truncatedNormal(Engine& eng, double mean, double sd, double lo, double hi);

}  // namespace draw
}  // namespace decon
