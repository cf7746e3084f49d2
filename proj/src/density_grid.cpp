#include "decon/density_grid.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "decon/error.hpp"

namespace decon {

namespace {

const std::vector<std::pair<GridKind, std::string>> kKindNames = {
    {GridKind::Marginal, "marginal"}, {GridKind::Joint, "joint"},
    {GridKind::Error, "error"},       {GridKind::Variance, "variance"},
    {GridKind::Probability, "probability"}, {GridKind::EnergyAdjusted, "energy-adjusted"}};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> splitOn(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::string gridKindName(GridKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

GridKind parseGridKind(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw dataError("unknown grid kind \"" + name + "\"");
}

void DensityGrid::validate() const {
  if (axes.empty() || axes.size() > 2) throw dataError("density grid: one or two axes expected");
  Eigen::Index total = 1;
  for (const auto& ax : axes) {
    if (ax.size() < 2) throw dataError("density grid: an axis needs at least two points");
    for (Eigen::Index k = 1; k < ax.size(); ++k)
      if (!(ax[k] > ax[k - 1])) throw dataError("density grid: axis is not strictly increasing");
    total *= ax.size();
  }
  if (values.size() != total) throw dataError("density grid: value count does not match the axes");
  if (isDensity() && (values.array() < 0.0).any()) throw dataError("density grid: negative density value");
}

double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index k = 1; k < x.size(); ++k) s += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
  return s;
}

double gridIntegral(const DensityGrid& grid) {
  if (grid.axes.size() == 1) return trapezoid(grid.axes[0], grid.values);
  const Eigen::Index na = grid.axes[0].size(), nb = grid.axes[1].size();
  Eigen::VectorXd inner(na);
  for (Eigen::Index a = 0; a < na; ++a) inner[a] = trapezoid(grid.axes[1], grid.values.segment(a * nb, nb));
  return trapezoid(grid.axes[0], inner);
}

Eigen::VectorXd linspace(double lo, double hi, int count) {
  if (count < 2) throw argumentError("linspace: need at least two points");
  Eigen::VectorXd v(count);
  for (int k = 0; k < count; ++k) v[k] = lo + (hi - lo) * k / (count - 1);
  v[count - 1] = hi;
  return v;
}

DensityGrid toRawUnits(const DensityGrid& grid) {
  if (grid.rawUnits) return grid;
  DensityGrid out = grid;
  out.rawUnits = true;
  const auto& c = grid.scale;
  switch (grid.kind) {
    case GridKind::Marginal:
    case GridKind::Joint:
      for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        out.axes[a] = grid.axes[a] / c[a];
        out.values *= c[a];
      }
      break;
    case GridKind::Probability:
      out.axes[0] = grid.axes[0] / c[0];
      break;
    case GridKind::Variance:
      out.axes[0] = grid.axes[0] / c[0];
      out.values = grid.values / (c[0] * c[0]);
      break;
    case GridKind::EnergyAdjusted: {
      // Z = X_l / X_J, so Z_raw = Z * c_J / c_l.
      const double ratio = c[1] / c[0];
      out.axes[0] = grid.axes[0] * ratio;
      out.values = grid.values / ratio;
      break;
    }
    case GridKind::Error:
      break;
  }
  return out;
}

void writeGridCsv(const DensityGrid& grid, std::ostream& out) {
  grid.validate();
  out << "# kind " << gridKindName(grid.kind) << '\n' << "# components";
  for (const auto& name : grid.components) out << ' ' << name;
  out << "\n# draws " << grid.drawCount << '\n';
  out << "# scenario " << (grid.scenario.empty() ? "-" : grid.scenario) << '\n' << "# scale";
  for (double c : grid.scale) out << ' ' << fmt(c);
  out << "\n# units " << (grid.rawUnits ? "raw" : "scaled") << '\n';
  if (grid.axes.size() == 1) {
    out << "x,value\n";
    for (Eigen::Index k = 0; k < grid.values.size(); ++k) out << fmt(grid.axes[0][k]) << ',' << fmt(grid.values[k]) << '\n';
    return;
  }
  out << "x1,x2,value\n";
  for (Eigen::Index a = 0; a < grid.axes[0].size(); ++a)
    for (Eigen::Index b = 0; b < grid.axes[1].size(); ++b)
      out << fmt(grid.axes[0][a]) << ',' << fmt(grid.axes[1][b]) << ',' << fmt(grid.at(a, b)) << '\n';
}

DensityGrid readGridCsv(std::istream& in) {
  DensityGrid g;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto words = splitOn(line.substr(2), ' ');
    if (words.empty()) continue;
    const std::string& key = words[0];
    if (key == "kind" && words.size() > 1) g.kind = parseGridKind(words[1]);
    else if (key == "components") g.components.assign(words.begin() + 1, words.end());
    else if (key == "draws" && words.size() > 1) g.drawCount = std::stol(words[1]);
    else if (key == "scenario" && words.size() > 1) g.scenario = words[1] == "-" ? "" : words[1];
    else if (key == "scale")
      for (std::size_t k = 1; k < words.size(); ++k) g.scale.push_back(std::stod(words[k]));
    else if (key == "units" && words.size() > 1) g.rawUnits = words[1] == "raw";
  }
  if (!std::getline(in, line)) throw dataError("density grid: missing column header");
  const bool twoAxes = splitOn(line, ',').size() == 3;
  std::vector<double> xs, ys, vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = splitOn(line, ',');
    if (cells.size() != (twoAxes ? 3u : 2u)) throw dataError("density grid: malformed row \"" + line + "\"");
    xs.push_back(std::stod(cells[0]));
    if (twoAxes) ys.push_back(std::stod(cells[1]));
    vals.push_back(std::stod(cells.back()));
  }
  g.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  if (!twoAxes) {
    g.axes = {Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()))};
  } else {
    std::size_t nb = 1;
    while (nb < xs.size() && xs[nb] == xs[0]) ++nb;
    const std::size_t na = xs.size() / nb;
    Eigen::VectorXd a(na), b(nb);
    for (std::size_t k = 0; k < na; ++k) a[k] = xs[k * nb];
    for (std::size_t k = 0; k < nb; ++k) b[k] = ys[k];
    g.axes = {a, b};
  }
  g.validate();
  return g;
}

}  // namespace decon
