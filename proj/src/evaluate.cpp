#include "decon/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "decon/error.hpp"
#include "decon/normal.hpp"

namespace decon {

PosteriorDensity::PosteriorDensity(const PosteriorDraws& draws)
    : dim_(draws.shape.dim()),
      q_(draws.shape.q),
      scale_(draws.scale),
      names_(draws.names),
      lower_(draws.shape.lower),
      upper_(draws.shape.upper) {
  if (draws.draws.empty()) throw dataError("posterior density: the draw set is empty");
  if (static_cast<int>(scale_.size()) != dim_) scale_.assign(dim_, 1.0);
  views_.reserve(draws.draws.size());
  for (const auto& m : draws.draws) views_.emplace_back(m);
}

double PosteriorDensity::marginal(int l, double xRaw) const {
  const double x = scale_[l] * xRaw;
  double total = 0.0;
  for (const auto& v : views_) total += v.marginalX(l).pdf(x);
  return scale_[l] * total / views_.size();
}

double PosteriorDensity::joint(const Eigen::VectorXd& xRaw) const {
  Eigen::VectorXd x(dim_);
  double jac = 1.0;
  for (int l = 0; l < dim_; ++l) {
    x[l] = scale_[l] * xRaw[l];
    jac *= scale_[l];
  }
  double total = 0.0;
  for (const auto& v : views_) total += v.jointDensity(x);
  return jac * total / views_.size();
}

double PosteriorDensity::pair(int a, int b, double xaRaw, double xbRaw) const {
  const double xa = scale_[a] * xaRaw, xb = scale_[b] * xbRaw;
  double total = 0.0;
  for (const auto& v : views_) total += v.pairDensity(a, b, xa, xb);
  return scale_[a] * scale_[b] * total / views_.size();
}

double PosteriorDensity::consumptionProb(int l, double xRaw) const {
  const double x = std::clamp(scale_[l] * xRaw, lower_, upper_);
  double total = 0.0;
  for (const auto& v : views_) total += v.curve(l).prob(x);
  return total / views_.size();
}

// ------------------------------------------------------------------ density grids

std::vector<DensityGrid> estimateDensities(const PosteriorDraws& draws, const GridSpec& spec, Exec exec) {
  if (draws.draws.empty()) throw dataError("estimateDensities: the draw set is empty");
  if (spec.points < 2 || spec.pairPoints < 2) throw configError("grid: point counts must be at least 2");
  if (!(spec.errorHalfWidth > 0.0)) throw configError("grid: error_half_width must be positive");
  const PosteriorDensity fit(draws);
  const auto& views = fit.views();
  const int d = fit.dim(), q = fit.q();
  const Eigen::VectorXd axis = linspace(fit.lower(), fit.upper(), spec.points);
  std::vector<DensityGrid> out;

  auto make = [&](GridKind kind, std::vector<int> comps, std::vector<Eigen::VectorXd> axes, Eigen::VectorXd values) {
    DensityGrid g;
    g.kind = kind;
    for (int c : comps) {
      g.components.push_back(fit.names()[c]);
      g.scale.push_back(fit.scale()[c]);
    }
    g.axes = std::move(axes);
    g.values = std::move(values);
    g.drawCount = fit.drawCount();
    return g;
  };
  auto normalized = [](const Eigen::VectorXd& x, Eigen::VectorXd y) {
    const double mass = trapezoid(x, y);
    if (!(mass > 0.0)) throw numericalError("estimateDensities: density grid has zero mass");
    return Eigen::VectorXd(y / mass);
  };

  for (int l = 0; l < d; ++l) {
    const Eigen::VectorXd f =
        posteriorMeanOnGrid(views, [l](const ModelView& v, double x) { return v.marginalX(l).pdf(x); }, axis, exec);
    out.push_back(make(GridKind::Marginal, {l}, {axis}, normalized(axis, f)));
  }
  if (spec.pairs) {
    const Eigen::VectorXd pairAxis = linspace(fit.lower(), fit.upper(), spec.pairPoints);
    const int np = spec.pairPoints;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        Eigen::VectorXd vals(np * np);
        forEachIndex(exec, np * np, [&](int k) {
          double total = 0.0;
          for (const auto& v : views) total += v.pairDensity(a, b, pairAxis[k / np], pairAxis[k % np]);
          vals[k] = total / views.size();
        });
        out.push_back(make(GridKind::Joint, {a, b}, {pairAxis, pairAxis}, vals));
      }
  }
  const Eigen::VectorXd errAxis = linspace(-spec.errorHalfWidth, spec.errorHalfWidth, spec.points);
  for (int c = 0; c < d; ++c) {
    const Eigen::VectorXd f =
        posteriorMeanOnGrid(views, [c](const ModelView& v, double e) { return v.errorLaw(c).pdf(e); }, errAxis, exec);
    out.push_back(make(GridKind::Error, {c}, {errAxis}, normalized(errAxis, f)));
  }
  for (int c = 0; c < d; ++c) {
    const Eigen::VectorXd s2 = posteriorMeanOnGrid(
        views, [c](const ModelView& v, double x) { return v.variance(c).variance(x); }, axis, exec);
    out.push_back(make(GridKind::Variance, {c}, {axis}, s2));
  }
  for (int l = 0; l < q; ++l) {
    const Eigen::VectorXd pr =
        posteriorMeanOnGrid(views, [l](const ModelView& v, double x) { return v.curve(l).prob(x); }, axis, exec);
    out.push_back(make(GridKind::Probability, {l}, {axis}, pr));
  }
  return out;
}

// ------------------------------------------------------------------ ISE

double iseEstimate(const PointDensity& truth, const PointDensity& estimate, const Eigen::MatrixXd& points, Exec exec) {
  const int n = static_cast<int>(points.rows());
  if (n == 0) throw argumentError("iseEstimate: no evaluation points");
  Eigen::VectorXd terms(n);
  forEachIndex(exec, n, [&](int i) {
    const Eigen::VectorXd x = points.row(i).transpose();
    const double f = truth(x);
    if (!(f > 0.0)) throw dataError("iseEstimate: the true density vanishes at evaluation point " + std::to_string(i));
    const double diff = f - estimate(x);
    terms[i] = diff * diff / f;
  });
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += terms[i];
  return total / n;
}

IseReport iseReport(const TruthDensity& truth, const std::function<double(int, double)>& estMarginal,
                    const PointDensity& estJoint, const Eigen::MatrixXd& points,
                    const std::vector<std::string>& names, Exec exec) {
  IseReport rep;
  rep.points = points.rows();
  if (points.cols() > 1)
    rep.rows.push_back({"joint", iseEstimate([&](const Eigen::VectorXd& x) { return truth.joint(x).value; }, estJoint,
                                             points, exec)});
  for (int l = 0; l < static_cast<int>(points.cols()); ++l) {
    const Eigen::MatrixXd col = points.col(l);
    rep.rows.push_back({names[l], iseEstimate([&](const Eigen::VectorXd& x) { return truth.marginal(l, x[0]).value; },
                                              [&](const Eigen::VectorXd& x) { return estMarginal(l, x[0]); }, col,
                                              exec)});
  }
  return rep;
}

void writeIseReport(const IseReport& report, std::ostream& out) {
  out << "target,ise,points,scenario,method\n";
  char buf[32];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.ise);
    out << row.target << ',' << buf << ',' << report.points << ',' << report.scenario << ',' << report.method << '\n';
  }
}

// ------------------------------------------------------------------ energy adjustment

Eigen::VectorXd energyAdjustedDensity(const std::function<double(double, double)>& joint, const Eigen::VectorXd& zGrid,
                                      double bLower, double bUpper, double aUpper, Exec exec,
                                      const std::vector<double>& kinks) {
  Eigen::VectorXd out(zGrid.size());
  forEachIndex(exec, static_cast<int>(zGrid.size()), [&](int g) {
    boost::math::quadrature::tanh_sinh<double> rule;
    const double z = zGrid[g];
    double hi = bUpper;
    if (z > 0.0 && std::isfinite(aUpper)) hi = std::min(hi, aUpper / z);
    if (!(hi > bLower)) {
      out[g] = 0.0;
      return;
    }
    auto integrand = [&](double xb) { return xb * joint(z * xb, xb); };
    std::vector<double> cuts = {bLower, hi};
    for (double k : kinks) {
      cuts.push_back(k);
      if (z > 0.0) cuts.push_back(k / z);
    }
    std::sort(cuts.begin(), cuts.end());
    double value = 0.0, err = 0.0, l1 = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = std::max(cuts[k], bLower), up = std::min(cuts[k + 1], hi);
      if (!(up > lo)) continue;
      double e = 0.0, m = 0.0;
      value += rule.integrate(integrand, lo, up, 1e-10, &e, &m);
      err += e;
      l1 += m;
    }
    if (!std::isfinite(value) || err > 1e-7 * std::max(l1, 1.0))
      throw numericalError("energy-adjusted density: quadrature did not converge at z = " + std::to_string(z));
    out[g] = value;
  });
  return out;
}

namespace {

// Normal scores and densities of one fitted marginal at Chebyshev-spaced nodes (dense
// toward both edges), read back by three-point Lagrange interpolation.
struct MarginalTable {
  double lower = 0.0, half = 1.0;
  std::vector<double> x, score, pdf;

  MarginalTable(const Univariate& law, double lo, double hi, int nodes) : lower(lo), half(0.5 * (hi - lo)) {
    x.resize(nodes);
    score.resize(nodes);
    pdf.resize(nodes);
    for (int k = 0; k < nodes; ++k) {
      x[k] = k + 1 == nodes ? hi : lo + half * (1.0 - std::cos(M_PI * k / (nodes - 1)));
      pdf[k] = law.pdf(x[k]);
      score[k] = normalScoreClamped(law, x[k]);
    }
  }

  // (score, pdf) at v; pdf is 0 outside the table.
  std::pair<double, double> at(double v) const {
    const int last = static_cast<int>(x.size()) - 1;
    if (v < x.front() || v > x.back()) return {0.0, 0.0};
    const double t = std::acos(std::clamp(1.0 - (v - lower) / half, -1.0, 1.0)) * last / M_PI;
    const int j = std::clamp(static_cast<int>(std::lround(t)), 1, last - 1);
    const double x0 = x[j - 1], x1 = x[j], x2 = x[j + 1];
    const double w0 = (v - x1) * (v - x2) / ((x0 - x1) * (x0 - x2));
    const double w1 = (v - x0) * (v - x2) / ((x1 - x0) * (x1 - x2));
    const double w2 = (v - x0) * (v - x1) / ((x2 - x0) * (x2 - x1));
    return {w0 * score[j - 1] + w1 * score[j] + w2 * score[j + 1],
            std::max(0.0, w0 * pdf[j - 1] + w1 * pdf[j] + w2 * pdf[j + 1])};
  }
};

}  // namespace

DensityGrid energyAdjustedMarginal(const PosteriorDensity& fit, int a, int b, const Eigen::VectorXd& zGrid, Exec exec) {
  if (a == b || a < 0 || b < 0 || a >= fit.dim() || b >= fit.dim())
    throw argumentError("energyAdjustedMarginal: need two distinct components");
  constexpr int kTableNodes = 4097, kPanels = 2000;
  const auto& views = fit.views();
  const double lo = fit.lower(), up = fit.upper();
  struct DrawTables {
    MarginalTable ta, tb;
    double r;
  };
  std::vector<DrawTables> tables;
  tables.reserve(views.size());
  for (const auto& v : views)
    tables.push_back({MarginalTable(v.marginalX(a), lo, up, kTableNodes), MarginalTable(v.marginalX(b), lo, up, kTableNodes),
                      v.corrX().matrix()(a, b)});

  DensityGrid g;
  g.kind = GridKind::EnergyAdjusted;
  g.components = {fit.names()[a], fit.names()[b]};
  g.scale = {fit.scale()[a], fit.scale()[b]};
  g.axes = {zGrid};
  g.values.resize(zGrid.size());
  g.drawCount = fit.drawCount();
  // f_Z(z) = int x_b f(z x_b, x_b) dx_b, averaged over draws, by composite Simpson in s with
  // x_b = lo + (hi - lo)(1 - cos(pi s)) / 2, which crowds nodes toward both ends.
  forEachIndex(exec, static_cast<int>(zGrid.size()), [&](int k) {
    const double z = zGrid[k];
    const double hi = z > 0.0 ? std::min(up, up / z) : up;
    if (!(hi > lo)) {
      g.values[k] = 0.0;
      return;
    }
    const double h = 1.0 / kPanels, half = 0.5 * (hi - lo);
    double total = 0.0;
    for (const auto& d : tables) {
      const double det = 1.0 - d.r * d.r, logNorm = -0.5 * std::log(det);
      double sum = 0.0;
      for (int j = 0; j <= kPanels; ++j) {
        const double xb = j == kPanels ? hi : lo + half * (1.0 - std::cos(M_PI * j * h));
        const double jacobian = half * M_PI * std::sin(M_PI * j * h);
        const auto [yb, fb] = d.tb.at(xb);
        const auto [ya, fa] = d.ta.at(z * xb);
        if (!(fa > 0.0) || !(fb > 0.0)) continue;
        if (d.r != 0.0 && std::max(std::abs(ya), std::abs(yb)) >= kScoreLimit) continue;
        const double quad = (ya * ya - 2.0 * d.r * ya * yb + yb * yb) / det - (ya * ya + yb * yb);
        const double weight = (j == 0 || j == kPanels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        sum += weight * jacobian * xb * fa * fb * std::exp(logNorm - 0.5 * quad);
      }
      total += sum * h / 3.0;
    }
    g.values[k] = total / tables.size();
  });
  return g;
}

DensityGrid energyAdjustedCovering(const PosteriorDensity& fit, int a, int b, double zStart, int points, Exec exec) {
  if (!(zStart > 0.0) || points < 3) throw argumentError("energyAdjustedCovering: need a positive start and three points");
  auto gridUpTo = [&](double zMax) {
    Eigen::VectorXd z(points);
    z[0] = 0.0;
    z.tail(points - 1) = linspace(std::log(1e-4 * zStart), std::log(zMax), points - 1).array().exp();
    return energyAdjustedMarginal(fit, a, b, z, exec);
  };
  double zMax = zStart;
  DensityGrid g = gridUpTo(zMax);
  for (int attempt = 0; attempt < 8 && std::abs(gridIntegral(g) - 1.0) > 2e-4; ++attempt) {
    zMax *= 4.0;
    g = gridUpTo(zMax);
  }
  return g;
}

// ------------------------------------------------------------------ residual diagnostics

std::vector<ResidualRow> residualDiagnostics(const PosteriorDensity& fit, const RecallDataset& data,
                                             const Eigen::MatrixXd& meanXt) {
  const int n = data.numSubjects(), d = data.numComponents();
  if (meanXt.rows() != n || meanXt.cols() != d) throw dataError("residual diagnostics: intake table does not match the data");
  int maxOcc = 0;
  for (int i = 0; i < n; ++i) maxOcc = std::max(maxOcc, data.numOccasions(i));
  if (maxOcc < 2) throw dataError("residual diagnostics: fewer than 2 occasions");

  const auto& views = fit.views();
  std::vector<ResidualRow> rows;
  for (int c = 0; c < d; ++c) {
    std::vector<double> sHat(n);
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (const auto& v : views) total += v.variance(c).sd(meanXt(i, c));
      sHat[i] = total / views.size();
    }
    for (int j = 0; j + 1 < maxOcc; ++j) {
      std::vector<double> e1, e2;
      for (int i = 0; i < n; ++i) {
        if (data.numOccasions(i) <= j + 1) continue;
        const double w1 = data.amounts[i](j, c), w2 = data.amounts[i](j + 1, c);
        if (c < data.q && (w1 <= 0.0 || w2 <= 0.0)) continue;
        e1.push_back((w1 - meanXt(i, c)) / sHat[i]);
        e2.push_back((w2 - meanXt(i, c)) / sHat[i]);
      }
      ResidualRow row;
      row.component = data.names[c];
      row.occasion = j;
      row.count = static_cast<long>(e1.size());
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.r = row.lower = row.upper = nan;
      if (row.count >= 2) {
        const double m1 = std::accumulate(e1.begin(), e1.end(), 0.0) / row.count;
        const double m2 = std::accumulate(e2.begin(), e2.end(), 0.0) / row.count;
        double s11 = 0.0, s22 = 0.0, s12 = 0.0;
        for (long k = 0; k < row.count; ++k) {
          s11 += (e1[k] - m1) * (e1[k] - m1);
          s22 += (e2[k] - m2) * (e2[k] - m2);
          s12 += (e1[k] - m1) * (e2[k] - m2);
        }
        if (s11 > 0.0 && s22 > 0.0) row.r = std::clamp(s12 / std::sqrt(s11 * s22), -1.0, 1.0);
        if (row.count > 3 && std::isfinite(row.r)) {
          const double z = std::atanh(row.r), half = 1.959963984540054 / std::sqrt(row.count - 3.0);
          row.lower = std::tanh(z - half);
          row.upper = std::tanh(z + half);
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void writeResidualTable(const std::vector<ResidualRow>& rows, std::ostream& out) {
  out << "component,occasion,next_occasion,count,correlation,lower95,upper95\n";
  char buf[3][32];
  for (const auto& r : rows) {
    std::snprintf(buf[0], 32, "%.17g", r.r);
    std::snprintf(buf[1], 32, "%.17g", r.lower);
    std::snprintf(buf[2], 32, "%.17g", r.upper);
    out << r.component << ',' << r.occasion + 1 << ',' << r.occasion + 2 << ',' << r.count << ',' << buf[0] << ','
        << buf[1] << ',' << buf[2] << '\n';
  }
}

}  // namespace decon
