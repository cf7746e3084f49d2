#pragma once

#include <exception>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include <omp.h>

#include "decon/copula.hpp"
#include "decon/model.hpp"

namespace decon {

/// Execution policy for index-parallel kernels. Serial is the reference; Parallel must
/// produce bit-identical results because every per-index result is written to its own
/// slot and reductions run in index order afterwards.
enum class Exec { Serial, Parallel };

/// Runs body(i) for every index. An exception thrown by any index is rethrown after the
/// loop; when several indices fail, the lowest one wins, as in the serial order.
template <class F>
void forEachIndex(Exec exec, int count, F&& body) {
  if (exec == Exec::Serial) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  int failedAt = count;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(decon_for_each_index)
      if (i < failedAt) {
        failedAt = i;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

template <class F>
double orderedSum(Exec exec, int count, F&& term) {
  std::vector<double> parts(count);
  forEachIndex(exec, count, [&](int i) { parts[i] = term(i); });
  double total = 0.0;
  for (double v : parts) total += v;
  return total;
}

/// Sets the OpenMP worker count; nonpositive means all available cores.
void setThreadCount(int threads);

/// Sum over rows of the N(0, R) log density of each row of `scores`.
double mvnScoresLogLik(const SphericalCorrelation& corr, const Eigen::MatrixXd& scores, Exec exec);

/// Pointwise posterior mean of f(view, x) across draws at each grid point.
Eigen::VectorXd posteriorMeanOnGrid(const std::vector<ModelView>& views,
                                    const std::function<double(const ModelView&, double)>& f,
                                    const Eigen::VectorXd& grid, Exec exec);

/// Posterior-mean joint density of X at each row of `points`.
Eigen::VectorXd posteriorMeanJoint(const std::vector<ModelView>& views, const Eigen::MatrixXd& points, Exec exec);

}  // namespace decon
