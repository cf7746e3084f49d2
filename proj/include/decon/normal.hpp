#pragma once

// Standard normal helpers shared by every module.

namespace decon::normal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double pdf(double x);
double logPdf(double x);
/// Lower tail Phi(x), accurate for very negative x.
double cdf(double x);
/// Upper tail 1 - Phi(x), accurate for very positive x.
double sf(double x);
/// log Phi(x) without underflow for x << 0.
double logCdf(double x);
/// Phi^{-1}(u) for u in (0,1); throws for u outside (0,1).
double quantile(double u);
/// -Phi^{-1}(s), i.e. the quantile evaluated from an upper-tail probability.
double quantileFromSf(double s);

/// N(x | mean, var) density.
double density(double x, double mean, double var);
double logDensity(double x, double mean, double var);

}  // namespace decon::normal

namespace decon::normal {

/// log Q(x) where Q is the upper tail.
double logSf(double x);
/// log{Phi(b) - Phi(a)} for a < b, stable in both tails; a or b may be infinite.
double logMass(double a, double b);

}  // namespace decon::normal
