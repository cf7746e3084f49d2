#include "decon/latent_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "decon/error.hpp"
#include "decon/normal.hpp"

namespace decon {

int RecallDataset::totalOccasions() const {
  int total = 0;
  for (const auto& a : amounts) total += static_cast<int>(a.rows());
  return total;
}

void RecallDataset::validate() const {
  const int d = numComponents();
  if (q < 0 || p < 0 || d == 0) throw dataError("dataset: no components");
  if (static_cast<int>(names.size()) != d) throw dataError("dataset: one name per component is required");
  if (static_cast<int>(scale.size()) != d) throw dataError("dataset: one scale factor per component is required");
  if (subjectIds.size() != amounts.size()) throw dataError("dataset: subject ids do not match subject count");
  if (amounts.empty()) throw dataError("dataset: no subjects");
  for (int i = 0; i < numSubjects(); ++i) {
    const auto& a = amounts[i];
    if (a.cols() != d) throw dataError("dataset: subject " + std::to_string(subjectIds[i]) + " has wrong width");
    if (a.rows() < 1) throw dataError("dataset: subject " + std::to_string(subjectIds[i]) + " has no occasions");
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      for (int l = 0; l < d; ++l) {
        const double v = a(j, l);
        if (!std::isfinite(v) || v < 0.0)
          throw dataError("dataset: invalid amount for subject " + std::to_string(subjectIds[i]) + ", component " +
                          names[l]);
        if (l >= q && !(v > 0.0))
          throw dataError("dataset: regular component " + names[l] + " has a zero recall for subject " +
                          std::to_string(subjectIds[i]));
      }
    }
  }
}

RecallDataset scaleRecalls(const RecallDataset& raw, double target) {
  RecallDataset out = raw;
  const int d = raw.numComponents();
  for (int l = 0; l < d; ++l) {
    double top = 0.0;
    for (const auto& a : raw.amounts) top = std::max(top, a.col(l).maxCoeff());
    if (!(top > 0.0)) throw dataError("scaling: component " + raw.names[l] + " is all zero");
    const double factor = target / top;
    for (auto& a : out.amounts) a.col(l) *= factor;
    out.scale[l] = raw.scale[l] * factor;
  }
  return out;
}

namespace {

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

}  // namespace

RecallDataset readRecallsCsv(const std::string& path, const std::vector<std::string>& episodicNames) {
  std::ifstream in(path);
  if (!in) throw dataError("cannot open recall file " + path);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = splitCsv(line);
    break;
  }
  if (header.size() < 3 || header[0] != "subject" || header[1] != "occasion")
    throw dataError(path + ": header must start with subject,occasion");
  const std::vector<std::string> cols(header.begin() + 2, header.end());

  // Episodic columns first, in the order given, then the rest in file order.
  std::vector<int> order;
  for (const auto& name : episodicNames) {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw dataError(path + ": episodic component '" + name + "' not in header");
    order.push_back(static_cast<int>(it - cols.begin()));
  }
  for (int c = 0; c < static_cast<int>(cols.size()); ++c)
    if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);

  RecallDataset data;
  data.q = static_cast<int>(episodicNames.size());
  data.p = static_cast<int>(cols.size()) - data.q;
  for (int c : order) data.names.push_back(cols[c]);
  data.scale.assign(cols.size(), 1.0);

  std::map<long, std::vector<std::pair<long, std::vector<double>>>> rows;
  std::vector<long> firstSeen;
  int lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = splitCsv(line);
    if (cells.size() != header.size())
      throw dataError(path + ":" + std::to_string(lineNo) + ": expected " + std::to_string(header.size()) + " fields");
    try {
      const long id = std::stol(cells[0]);
      const long occ = std::stol(cells[1]);
      std::vector<double> vals;
      for (int c : order) vals.push_back(std::stod(cells[2 + c]));
      if (!rows.count(id)) firstSeen.push_back(id);
      rows[id].emplace_back(occ, std::move(vals));
    } catch (const std::logic_error&) {
      throw dataError(path + ":" + std::to_string(lineNo) + ": malformed number");
    }
  }
  for (long id : firstSeen) {
    auto& rs = rows[id];
    std::stable_sort(rs.begin(), rs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Eigen::MatrixXd a(rs.size(), cols.size());
    for (std::size_t j = 0; j < rs.size(); ++j)
      for (std::size_t c = 0; c < cols.size(); ++c) a(j, c) = rs[j].second[c];
    data.subjectIds.push_back(id);
    data.amounts.push_back(std::move(a));
  }
  data.validate();
  return data;
}

void writeRecallsCsv(const RecallDataset& data, std::ostream& out) {
  out << "subject,occasion";
  for (const auto& n : data.names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (int i = 0; i < data.numSubjects(); ++i) {
    for (int j = 0; j < data.numOccasions(i); ++j) {
      out << data.subjectIds[i] << ',' << (j + 1);
      for (int l = 0; l < data.numComponents(); ++l) {
        const double v = data.amounts[i](j, l);
        if (v == 0.0) {
          out << ",0";
        } else {
          std::snprintf(buf, sizeof buf, ",%.17g", v);
          out << buf;
        }
      }
      out << '\n';
    }
  }
}

VarianceFunction::VarianceFunction(SplineBasis basis, Eigen::VectorXd logCoef)
    : basis_(std::move(basis)), logCoef_(std::move(logCoef)) {
  if (logCoef_.size() != basis_.size()) throw argumentError("variance function: coefficient length must equal J");
  coef_ = logCoef_.array().exp();
}

double VarianceFunction::variance(double x) const {
  return basis_.combine(std::clamp(x, basis_.lower(), basis_.upper()), coef_);
}

ConsumptionCurve::ConsumptionCurve(SplineBasis basis, Eigen::VectorXd coef)
    : basis_(std::move(basis)), coef_(std::move(coef)) {
  if (coef_.size() != basis_.size()) throw argumentError("consumption curve: coefficient length must equal J");
}

double ConsumptionCurve::h(double x) const {
  if (!basis_.contains(x)) throw argumentError("consumption curve: intake outside [A,B]");
  return basis_.combine(x, coef_);
}

double ConsumptionCurve::prob(double x) const { return normal::cdf(h(x)); }

Eigen::VectorXd transformIntake(const Eigen::VectorXd& x, const std::vector<ConsumptionCurve>& curves) {
  const int q = static_cast<int>(curves.size());
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd xt(q + d);
  for (int l = 0; l < q; ++l) {
    const double h = curves[l].h(x[l]);
    xt[l] = h;
    xt[q + l] = x[l] / std::max(normal::cdf(h), kProbFloor);
  }
  for (int l = q; l < d; ++l) xt[q + l] = x[l];
  return xt;
}

double surrogateMean(const Eigen::VectorXd& x, const std::vector<ConsumptionCurve>& curves, int l) {
  const int q = static_cast<int>(curves.size());
  if (l < q) return curves[l].h(x[l]);
  if (l < 2 * q) {
    const double prob = curves[l - q].prob(x[l - q]);
    if (!(prob > 0.0)) throw numericalError("surrogate mean: degenerate consumption probability");
    return x[l - q] / prob;
  }
  return x[l - q];
}

double logLikOccasion(const Eigen::VectorXd& w, const Eigen::VectorXd& xt, const ErrorLaw& law) {
  const int q = law.q;
  const int d = static_cast<int>(law.marginals.size());
  double total = 0.0;
  for (int l = 0; l < q; ++l) total += normal::logPdf(w[l] - xt[l]);
  Eigen::VectorXd scores(d);
  for (int c = 0; c < d; ++c) {
    const double s = law.variance[c].sd(xt[q + c]);
    const double eps = (w[q + c] - xt[q + c]) / s;
    total += law.marginals[c]->logPdf(eps) - std::log(s);
    scores[c] = normalScore(*law.marginals[c], eps);
  }
  return total + copulaLogFactor(law.corr, scores);
}

}  // namespace decon
