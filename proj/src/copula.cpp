#include "decon/copula.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "decon/error.hpp"
#include "decon/normal.hpp"

namespace decon {

SphericalCorrelation::SphericalCorrelation(int dim)
    : b_(Eigen::VectorXd::Zero(std::max(dim - 1, 0))), theta_(Eigen::VectorXd::Zero(numAngles(std::max(dim, 2)))) {
  if (dim < 1) throw argumentError("correlation: dimension must be positive");
  chol_ = Eigen::MatrixXd::Identity(dim, dim);
  corr_ = chol_;
  inv_ = chol_;
  logDet_ = 0.0;
}

SphericalCorrelation::SphericalCorrelation(Eigen::VectorXd b, Eigen::VectorXd theta)
    : b_(std::move(b)), theta_(std::move(theta)) {
  const int dim = static_cast<int>(b_.size()) + 1;
  if (theta_.size() != numAngles(std::max(dim, 2))) throw argumentError("correlation: angle count does not match b");
  for (Eigen::Index t = 0; t < b_.size(); ++t)
    if (!(std::abs(b_[t]) < 1.0)) throw argumentError("correlation: |b| must be below 1");
  for (Eigen::Index s = 0; s < theta_.size(); ++s)
    if (!(std::abs(theta_[s]) <= M_PI + 1e-12)) throw argumentError("correlation: |theta| must not exceed pi");
  build();
}

void SphericalCorrelation::build() {
  const int dim = static_cast<int>(b_.size()) + 1;
  chol_ = Eigen::MatrixXd::Zero(dim, dim);
  chol_(0, 0) = 1.0;
  logDet_ = 0.0;
  for (int r = 1; r < dim; ++r) {
    const double br = b_[r - 1];
    const int off = angleOffset(r);
    double carry = br;
    for (int k = 0; k < r - 1; ++k) {
      chol_(r, k) = carry * std::sin(theta_[off + k]);
      carry *= std::cos(theta_[off + k]);
    }
    chol_(r, r - 1) = carry;
    chol_(r, r) = std::sqrt(1.0 - br * br);
    chol_.row(r) /= chol_.row(r).norm();
    logDet_ += std::log1p(-br * br);
  }
  corr_ = chol_ * chol_.transpose();
  corr_.diagonal().setOnes();
  const Eigen::MatrixXd linv = chol_.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(dim, dim));
  inv_ = linv.transpose() * linv;
}

double SphericalCorrelation::det() const { return std::exp(logDet_); }

std::pair<Eigen::VectorXd, Eigen::VectorXd> SphericalCorrelation::recoverParams(const Eigen::MatrixXd& R) {
  const int dim = static_cast<int>(R.rows());
  if (R.cols() != dim || dim < 1) throw argumentError("recoverParams: matrix must be square");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-10) throw argumentError("recoverParams: matrix not symmetric");
  if ((R.diagonal().array() - 1.0).abs().maxCoeff() > 1e-10) throw argumentError("recoverParams: diagonal must be 1");
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) throw argumentError("recoverParams: matrix not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  Eigen::VectorXd b = Eigen::VectorXd::Zero(std::max(dim - 1, 0));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(numAngles(std::max(dim, 2)));
  for (int r = 1; r < dim; ++r) {
    const double diag = std::min(L(r, r), 1.0);
    double br = std::sqrt(std::max(0.0, 1.0 - diag * diag));
    if (L(r, r - 1) < 0.0) br = -br;
    b[r - 1] = br;
    if (br == 0.0) continue;
    const Eigen::VectorXd u = L.row(r).head(r).transpose() / br;
    const int off = angleOffset(r);
    for (int k = 0; k < r - 1; ++k) {
      const double rest = u.segment(k + 1, r - 1 - k).norm();
      theta[off + k] = std::atan2(u[k], rest);
    }
  }
  return {b, theta};
}

double copulaLogFactor(const SphericalCorrelation& corr, const Eigen::VectorXd& scores) {
  const double quad = scores.dot(corr.inverse() * scores) - scores.squaredNorm();
  return -0.5 * corr.logDet() - 0.5 * quad;
}

double mvnLogDensity(const SphericalCorrelation& corr, const Eigen::VectorXd& scores) {
  const double quad = scores.dot(corr.inverse() * scores);
  return -0.5 * corr.dim() * std::log(2.0 * M_PI) - 0.5 * corr.logDet() - 0.5 * quad;
}

GaussianCopula::GaussianCopula(SphericalCorrelation corr, std::vector<std::shared_ptr<const Univariate>> marginals)
    : corr_(std::move(corr)), marginals_(std::move(marginals)) {
  if (static_cast<int>(marginals_.size()) != corr_.dim())
    throw argumentError("copula: one marginal per coordinate is required");
}

double GaussianCopula::logDensity(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(dim());
  double total = 0.0;
  for (int l = 0; l < dim(); ++l) {
    y[l] = normalScore(*marginals_[l], x[l]);
    total += marginals_[l]->logPdf(x[l]);
  }
  return total + copulaLogFactor(corr_, y);
}

Eigen::VectorXd GaussianCopula::sampleScores(Engine& eng) const {
  Eigen::VectorXd z(dim());
  for (int l = 0; l < dim(); ++l) z[l] = draw::standardNormal(eng);
  return corr_.cholesky() * z;
}

Eigen::MatrixXd GaussianCopula::sampleJoint(int n, Engine& eng) const {
  Eigen::MatrixXd out(n, dim());
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd y = sampleScores(eng);
    for (int l = 0; l < dim(); ++l) {
      const double u = std::clamp(normal::cdf(y[l]), 1e-300, 1.0 - 0x1.0p-53);
      out(i, l) = marginals_[l]->quantile(u);
    }
  }
  return out;
}

}  // namespace decon
