#pragma once

#include <functional>

#include <Eigen/Core>

namespace decon {

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Quasi-Newton (BFGS) minimization with central-difference gradients.
MinimizeResult minimizeBfgs(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd start,
                            int maxIter = 200, double gradTol = 1e-6);

/// One-dimensional k-means with quantile-spaced starting centers. Returns labels; fills centers.
Eigen::VectorXi kmeans1d(const Eigen::VectorXd& values, int k, Eigen::VectorXd& centers, int maxIter = 100);

}  // namespace decon
