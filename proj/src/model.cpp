#include "decon/model.hpp"

#include <cmath>

#include "decon/error.hpp"
#include "decon/normal.hpp"

namespace decon {

namespace {

void push(std::vector<std::pair<std::string, double>>& out, const std::string& stem, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) out.emplace_back(stem + "[" + std::to_string(k) + "]", v[k]);
}

void pull(const std::vector<double>& values, std::size_t& pos, Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = values.at(pos++);
}

}  // namespace

void ModelParams::allocate(int q_, int p_, int numBases_, int kX, int kEps) {
  q = q_;
  p = p_;
  numBases = numBases_;
  const int d = q + p;
  xi.assign(q, Eigen::VectorXd::Zero(numBases));
  piX = Eigen::MatrixXd::Zero(p, kX);
  muX = Eigen::VectorXd::Zero(kX);
  varX = Eigen::VectorXd::Ones(kX);
  piEps = Eigen::MatrixXd::Zero(d, kEps);
  pEps = Eigen::VectorXd::Constant(kEps, 0.5);
  muTildeEps = Eigen::VectorXd::Zero(kEps);
  var1Eps = Eigen::VectorXd::Ones(kEps);
  var2Eps = Eigen::VectorXd::Ones(kEps);
  vartheta.assign(d, Eigen::VectorXd::Zero(numBases));
  beta.assign(q, Eigen::VectorXd::Zero(numBases));
  bX = Eigen::VectorXd::Zero(std::max(d - 1, 0));
  thetaX = Eigen::VectorXd::Zero(SphericalCorrelation::numAngles(std::max(d, 2)));
  bEps = bX;
  thetaEps = thetaX;
}

std::vector<std::pair<std::string, double>> ModelParams::flatten() const {
  std::vector<std::pair<std::string, double>> out;
  for (int l = 0; l < q; ++l) push(out, "xi[" + std::to_string(l) + "]", xi[l]);
  for (int r = 0; r < p; ++r) push(out, "piX[" + std::to_string(r) + "]", piX.row(r).transpose());
  push(out, "muX", muX);
  push(out, "varX", varX);
  for (int c = 0; c < dim(); ++c) push(out, "piEps[" + std::to_string(c) + "]", piEps.row(c).transpose());
  push(out, "pEps", pEps);
  push(out, "muTildeEps", muTildeEps);
  push(out, "var1Eps", var1Eps);
  push(out, "var2Eps", var2Eps);
  for (int c = 0; c < dim(); ++c) push(out, "vartheta[" + std::to_string(c) + "]", vartheta[c]);
  for (int l = 0; l < q; ++l) push(out, "beta[" + std::to_string(l) + "]", beta[l]);
  push(out, "bX", bX);
  push(out, "thetaX", thetaX);
  push(out, "bEps", bEps);
  push(out, "thetaEps", thetaEps);
  return out;
}

void ModelParams::unflatten(const std::vector<double>& values) {
  std::size_t pos = 0;
  for (auto& v : xi) pull(values, pos, v);
  for (int r = 0; r < p; ++r) {
    Eigen::VectorXd row(piX.cols());
    pull(values, pos, row);
    piX.row(r) = row.transpose();
  }
  pull(values, pos, muX);
  pull(values, pos, varX);
  for (int c = 0; c < dim(); ++c) {
    Eigen::VectorXd row(piEps.cols());
    pull(values, pos, row);
    piEps.row(c) = row.transpose();
  }
  pull(values, pos, pEps);
  pull(values, pos, muTildeEps);
  pull(values, pos, var1Eps);
  pull(values, pos, var2Eps);
  for (auto& v : vartheta) pull(values, pos, v);
  for (auto& v : beta) pull(values, pos, v);
  pull(values, pos, bX);
  pull(values, pos, thetaX);
  pull(values, pos, bEps);
  pull(values, pos, thetaEps);
  if (pos != values.size()) throw dataError("draw record length does not match its declared shape");
}

ModelView::ModelView(const ModelParams& params)
    : params_(params),
      corrX_(params.dim() > 1 ? SphericalCorrelation(params.bX, params.thetaX) : SphericalCorrelation(1)),
      corrEps_(params.dim() > 1 ? SphericalCorrelation(params.bEps, params.thetaEps) : SphericalCorrelation(1)) {
  const SplineBasis basis = params.basis();
  const int q = params.q;
  for (int l = 0; l < q; ++l) marginalX_.push_back(std::make_shared<BsplineDensity>(basis, params.xi[l]));
  for (int r = 0; r < params.p; ++r)
    marginalX_.push_back(std::make_shared<TruncNormMixture>(params.piX.row(r).transpose(), params.muX, params.varX,
                                                            params.lower, params.upper));
  std::vector<RestrictedErrorKernel> kernels;
  for (int k = 0; k < params.numAtomsEps(); ++k)
    kernels.emplace_back(params.pEps[k], params.muTildeEps[k], params.var1Eps[k], params.var2Eps[k]);
  for (int c = 0; c < params.dim(); ++c) {
    errors_.push_back(std::make_shared<ErrorMixture>(params.piEps.row(c).transpose(), kernels));
    variance_.emplace_back(basis, params.vartheta[c]);
  }
  for (int l = 0; l < q; ++l) curves_.emplace_back(basis, params.beta[l]);
  law_.q = q;
  law_.marginals.assign(errors_.begin(), errors_.end());
  law_.variance = variance_;
  law_.corr = corrEps_;
}

double ModelView::jointDensity(const Eigen::VectorXd& x) const {
  const int d = dim();
  Eigen::VectorXd y(d);
  double logf = 0.0;
  for (int l = 0; l < d; ++l) {
    const double f = marginalX_[l]->pdf(x[l]);
    if (!(f > 0.0)) return 0.0;
    logf += std::log(f);
    y[l] = normalScoreClamped(*marginalX_[l], x[l]);
  }
  if (y.cwiseAbs().maxCoeff() >= kScoreLimit && !corrX_.matrix().isIdentity(0.0)) return 0.0;
  return std::exp(logf + copulaLogFactor(corrX_, y));
}

double ModelView::pairDensity(int a, int b, double xa, double xb) const {
  const double fa = marginalX_[a]->pdf(xa), fb = marginalX_[b]->pdf(xb);
  if (!(fa > 0.0) || !(fb > 0.0)) return 0.0;
  const double r = corrX_.matrix()(a, b);
  const double ya = normalScoreClamped(*marginalX_[a], xa), yb = normalScoreClamped(*marginalX_[b], xb);
  // A score pinned at the clamp means a support edge, where the copula factor tends to zero.
  if (r != 0.0 && std::max(std::abs(ya), std::abs(yb)) >= kScoreLimit) return 0.0;
  const double det = 1.0 - r * r;
  const double quad = (ya * ya - 2.0 * r * ya * yb + yb * yb) / det - (ya * ya + yb * yb);
  return fa * fb * std::exp(-0.5 * std::log(det) - 0.5 * quad);
}

}  // namespace decon
