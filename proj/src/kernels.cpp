#include "decon/kernels.hpp"

#include <cmath>

namespace decon {

void setThreadCount(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
  else omp_set_num_threads(omp_get_num_procs());
}

double mvnScoresLogLik(const SphericalCorrelation& corr, const Eigen::MatrixXd& scores, Exec exec) {
  const Eigen::MatrixXd& inv = corr.inverse();
  const double constant = -0.5 * corr.dim() * std::log(2.0 * M_PI) - 0.5 * corr.logDet();
  return orderedSum(exec, static_cast<int>(scores.rows()), [&](int i) {
    const Eigen::VectorXd y = scores.row(i).transpose();
    return constant - 0.5 * y.dot(inv * y);
  });
}

Eigen::VectorXd posteriorMeanOnGrid(const std::vector<ModelView>& views,
                                    const std::function<double(const ModelView&, double)>& f,
                                    const Eigen::VectorXd& grid, Exec exec) {
  Eigen::VectorXd out(grid.size());
  forEachIndex(exec, static_cast<int>(grid.size()), [&](int g) {
    double total = 0.0;
    for (const auto& v : views) total += f(v, grid[g]);
    out[g] = total / static_cast<double>(views.size());
  });
  return out;
}

Eigen::VectorXd posteriorMeanJoint(const std::vector<ModelView>& views, const Eigen::MatrixXd& points, Exec exec) {
  Eigen::VectorXd out(points.rows());
  forEachIndex(exec, static_cast<int>(points.rows()), [&](int r) {
    const Eigen::VectorXd x = points.row(r).transpose();
    double total = 0.0;
    for (const auto& v : views) total += v.jointDensity(x);
    out[r] = total / static_cast<double>(views.size());
  });
  return out;
}

}  // namespace decon
