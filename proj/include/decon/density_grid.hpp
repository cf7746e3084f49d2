#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace decon {

enum class GridKind { Marginal, Joint, Error, Variance, Probability, EnergyAdjusted };

std::string gridKindName(GridKind kind);
GridKind parseGridKind(const std::string& name);

/// Values on a rectangular grid. With two axes the values are stored row-major,
/// the second axis varying fastest.
struct DensityGrid {
  GridKind kind = GridKind::Marginal;
  std::vector<std::string> components;
  std::vector<Eigen::VectorXd> axes;
  Eigen::VectorXd values;
  long drawCount = 0;
  std::string scenario;
  std::vector<double> scale;  // per listed component; 1 when unscaled
  bool rawUnits = false;

  bool isDensity() const { return kind == GridKind::Marginal || kind == GridKind::Joint || kind == GridKind::Error || kind == GridKind::EnergyAdjusted; }
  /// Throws when axes are not strictly increasing, sizes disagree, or a density is negative.
  void validate() const;
  double at(Eigen::Index a, Eigen::Index b) const { return values[a * axes[1].size() + b]; }
};

/// Trapezoid rule over one axis.
double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
/// Trapezoid rule over a one- or two-axis grid.
double gridIntegral(const DensityGrid& grid);
Eigen::VectorXd linspace(double lo, double hi, int count);

/// Undoes the per-component multiplicative scaling (amount_scaled = scale * amount_raw):
/// axes are divided by the scale and density values pick up the Jacobian factors.
DensityGrid toRawUnits(const DensityGrid& grid);

/// Header lines prefixed with `#` (kind, components, draws, scenario, scale, units),
/// then `x,value` or `x1,x2,value` rows.
void writeGridCsv(const DensityGrid& grid, std::ostream& out);
DensityGrid readGridCsv(std::istream& in);

}  // namespace decon
