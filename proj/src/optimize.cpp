#include "decon/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace decon {

namespace {

Eigen::VectorXd numericGradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
    probe[k] = x[k] + h;
    const double up = f(probe);
    probe[k] = x[k] - h;
    const double down = f(probe);
    probe[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace

MinimizeResult minimizeBfgs(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd start,
                            int maxIter, double gradTol) {
  const Eigen::Index n = start.size();
  MinimizeResult res;
  res.x = std::move(start);
  res.value = f(res.x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = numericGradient(f, res.x);
  for (int it = 0; it < maxIter; ++it) {
    res.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() < gradTol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -H * g;
    if (dir.dot(g) >= 0.0) {
      H.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    Eigen::VectorXd next;
    double fnext = res.value;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      next = res.x + step * dir;
      fnext = f(next);
      if (std::isfinite(fnext) && fnext <= res.value + 1e-4 * step * g.dot(dir)) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      res.converged = true;
      break;
    }
    const Eigen::VectorXd gnext = numericGradient(f, next);
    const Eigen::VectorXd s = next - res.x;
    const Eigen::VectorXd y = gnext - g;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const double drop = res.value - fnext;
    res.x = next;
    res.value = fnext;
    g = gnext;
    if (drop >= 0.0 && drop < 1e-12 * (1.0 + std::abs(fnext))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Eigen::VectorXi kmeans1d(const Eigen::VectorXd& values, int k, Eigen::VectorXd& centers, int maxIter) {
  const Eigen::Index n = values.size();
  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  centers.resize(k);
  for (int c = 0; c < k; ++c) {
    const double pos = (c + 0.5) / k * (n - 1);
    centers[c] = sorted[static_cast<std::size_t>(std::lround(pos))];
  }
  Eigen::VectorXi labels = Eigen::VectorXi::Constant(n, -1);
  for (int it = 0; it < maxIter; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bestDist = std::abs(values[i] - centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = std::abs(values[i] - centers[c]);
        if (d < bestDist) {
          bestDist = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum[labels[i]] += values[i];
      count[labels[i]] += 1.0;
    }
    for (int c = 0; c < k; ++c)
      if (count[c] > 0.0) centers[c] = sum[c] / count[c];
    if (!changed) break;
  }
  return labels;
}

}  // namespace decon
