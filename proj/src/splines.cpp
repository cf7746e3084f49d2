#include "decon/splines.hpp"

#include <algorithm>
#include <cmath>

#include "decon/error.hpp"

namespace decon {

namespace {

// Antiderivative of the cardinal quadratic B-spline supported on [0,3].
double cardinalIntegral(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 3.0) return 1.0;
  if (s < 1.0) return s * s * s / 6.0;
  if (s < 2.0) {
    const double u = s - 1.0;
    return 1.0 / 6.0 + (-u * u * u / 3.0 + 0.5 * u * u + 0.5 * u);
  }
  const double u = 1.0 - (s - 2.0);
  return 5.0 / 6.0 + (1.0 - u * u * u) / 6.0;
}

}  // namespace

SplineBasis::SplineBasis(double lower, double upper, int numBases)
    : lower_(lower), upper_(upper), numBases_(numBases) {
  if (!(upper > lower)) throw argumentError("spline basis: invalid interval (B <= A)");
  if (numBases < 5) throw argumentError("spline basis: too few bases (J < 5)");
  const int intervals = numBases - 2;
  delta_ = (upper - lower) / intervals;
  knots_.reserve(intervals + 5);
  knots_.insert(knots_.end(), 2, lower);
  for (int i = 0; i <= intervals; ++i) knots_.push_back(i == intervals ? upper : lower + i * delta_);
  knots_.insert(knots_.end(), 2, upper);
  areas_ = Eigen::VectorXd::Constant(numBases, delta_);
  areas_[0] = areas_[numBases - 1] = delta_ / 6.0;
  areas_[1] = areas_[numBases - 2] = 5.0 * delta_ / 6.0;
}

SplineBasis::Local SplineBasis::local(double x) const {
  if (!(x >= lower_ && x <= upper_)) throw argumentError("spline basis: point outside [A,B]");
  const double s = (x - lower_) / delta_;
  int i = static_cast<int>(std::floor(s));
  i = std::clamp(i, 0, numIntervals() - 1);
  const double u = s - i;
  Local out;
  out.first = i;
  out.value[0] = 0.5 * (1.0 - u) * (1.0 - u);
  out.value[1] = -u * u + u + 0.5;
  out.value[2] = 0.5 * u * u;
  return out;
}

Eigen::VectorXd SplineBasis::eval(double x) const {
  const Local loc = local(x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(numBases_);
  for (int k = 0; k < 3; ++k) out[loc.first + k] = loc.value[k];
  return out;
}

double SplineBasis::combine(double x, const Eigen::VectorXd& coef) const {
  const Local loc = local(x);
  return loc.value[0] * coef[loc.first] + loc.value[1] * coef[loc.first + 1] + loc.value[2] * coef[loc.first + 2];
}

Eigen::VectorXd SplineBasis::integralTo(double x) const {
  const double xc = std::clamp(x, lower_, upper_);
  const double s = (xc - lower_) / delta_;
  Eigen::VectorXd out(numBases_);
  for (int j = 0; j < numBases_; ++j) {
    const double shift = 2.0 - j;
    out[j] = delta_ * (cardinalIntegral(s + shift) - cardinalIntegral(shift));
  }
  return out;
}

Eigen::MatrixXd SplineBasis::design(const Eigen::VectorXd& points) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.size(), numBases_);
  for (Eigen::Index r = 0; r < points.size(); ++r) {
    const Local loc = local(points[r]);
    for (int k = 0; k < 3; ++k) out(r, loc.first + k) = loc.value[k];
  }
  return out;
}

Eigen::MatrixXd secondDifference(int numBases) {
  if (numBases < 3) throw argumentError("penalty: need at least 3 coefficients");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(numBases - 2, numBases);
  for (int r = 0; r < numBases - 2; ++r) {
    d(r, r) = 1.0;
    d(r, r + 1) = -2.0;
    d(r, r + 2) = 1.0;
  }
  return d;
}

Eigen::MatrixXd makePenalty(int numBases) {
  const Eigen::MatrixXd d = secondDifference(numBases);
  return d.transpose() * d;
}

}  // namespace decon
