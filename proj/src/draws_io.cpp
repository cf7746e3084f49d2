#include "decon/draws_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "decon/error.hpp"

namespace decon {

namespace {

constexpr const char* kMagic = "# decon-draws v1";

std::string formatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json metaJson(const PosteriorDraws& d, DrawFormat format) {
  const ModelParams& s = d.shape;
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [block, st] : d.acceptance) acc[block] = {st.proposed, st.accepted};
  return {{"format", format == DrawFormat::Csv ? "csv" : "binary"},
          {"q", s.q},
          {"p", s.p},
          {"lower", s.lower},
          {"upper", s.upper},
          {"num_bases", s.numBases},
          {"k_x", s.numAtomsX()},
          {"k_eps", s.numAtomsEps()},
          {"names", d.names},
          {"scale", d.scale},
          {"iterations", d.iterations},
          {"burnin", d.burnin},
          {"thin", d.thin},
          {"seed", d.seed},
          {"count", d.draws.size()},
          {"acceptance", acc}};
}

}  // namespace

DrawFormat parseDrawFormat(const std::string& name) {
  if (name == "csv") return DrawFormat::Csv;
  if (name == "binary") return DrawFormat::Binary;
  throw configError("draw format must be \"csv\" or \"binary\", got \"" + name + "\"");
}

void writeDraws(const PosteriorDraws& draws, std::ostream& out, DrawFormat format) {
  out << kMagic << '\n' << "# meta " << metaJson(draws, format).dump() << '\n';
  const auto names = draws.shape.flatten();
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k].first;
  out << '\n';
  if (format == DrawFormat::Csv) {
    for (const ModelParams& m : draws.draws) {
      const auto flat = m.flatten();
      for (std::size_t k = 0; k < flat.size(); ++k) out << (k ? "," : "") << formatDouble(flat[k].second);
      out << '\n';
    }
    return;
  }
  static_assert(std::endian::native == std::endian::little, "binary draws assume a little-endian host");
  for (const ModelParams& m : draws.draws)
    for (const auto& [name, value] : m.flatten()) out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

PosteriorDraws readDraws(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw dataError("draws file: missing version header");
  if (!std::getline(in, line) || line.rfind("# meta ", 0) != 0) throw dataError("draws file: missing meta line");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line.substr(7));
  } catch (const nlohmann::json::exception& e) {
    throw dataError(std::string("draws file: bad meta line: ") + e.what());
  }
  PosteriorDraws d;
  try {
    d.shape.lower = meta.at("lower").get<double>();
    d.shape.upper = meta.at("upper").get<double>();
    d.shape.allocate(meta.at("q").get<int>(), meta.at("p").get<int>(), meta.at("num_bases").get<int>(),
                     meta.at("k_x").get<int>(), meta.at("k_eps").get<int>());
    d.names = meta.at("names").get<std::vector<std::string>>();
    d.scale = meta.at("scale").get<std::vector<double>>();
    d.iterations = meta.at("iterations").get<int>();
    d.burnin = meta.at("burnin").get<int>();
    d.thin = meta.at("thin").get<int>();
    d.seed = meta.at("seed").get<std::uint64_t>();
    for (const auto& [block, pair] : meta.at("acceptance").items())
      d.acceptance[block] = BlockStats{pair.at(0).get<long>(), pair.at(1).get<long>()};
  } catch (const nlohmann::json::exception& e) {
    throw dataError(std::string("draws file: incomplete meta line: ") + e.what());
  }
  const std::size_t count = meta.value("count", std::size_t{0});
  const bool binary = meta.value("format", std::string("csv")) == "binary";

  if (!std::getline(in, line)) throw dataError("draws file: missing column header");
  const auto expected = d.shape.flatten();
  {
    std::stringstream ss(line);
    std::string name;
    std::size_t k = 0;
    while (std::getline(ss, name, ',')) {
      if (k >= expected.size() || name != expected[k].first)
        throw dataError("draws file: column " + std::to_string(k) + " is \"" + name + "\", which does not match the meta shape");
      ++k;
    }
    if (k != expected.size()) throw dataError("draws file: column header is too short");
  }
  std::vector<double> values(expected.size());
  for (std::size_t r = 0; r < count; ++r) {
    if (binary) {
      in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
      if (!in) throw dataError("draws file: truncated binary record " + std::to_string(r));
    } else {
      if (!std::getline(in, line)) throw dataError("draws file: expected " + std::to_string(count) + " records");
      const char* cur = line.c_str();
      for (std::size_t k = 0; k < values.size(); ++k) {
        char* end = nullptr;
        values[k] = std::strtod(cur, &end);
        if (end == cur) throw dataError("draws file: bad number in record " + std::to_string(r));
        cur = *end == ',' ? end + 1 : end;
      }
    }
    ModelParams m = d.shape;
    m.unflatten(values);
    d.draws.push_back(std::move(m));
  }
  return d;
}

void saveDraws(const PosteriorDraws& draws, const std::string& path, DrawFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dataError("cannot open " + path + " for writing");
  writeDraws(draws, out, format);
  if (!out) throw dataError("failed writing " + path);
}

PosteriorDraws loadDraws(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dataError("cannot open draws file " + path);
  return readDraws(in);
}

void writeAcceptance(const PosteriorDraws& draws, std::ostream& out) {
  out << "block,proposed,accepted,rate\n";
  for (const auto& [block, st] : draws.acceptance)
    out << block << ',' << st.proposed << ',' << st.accepted << ',' << formatDouble(st.rate()) << '\n';
}

}  // namespace decon

namespace decon {

void writeIntakes(const PosteriorDraws& draws, std::ostream& out) {
  out << "subject";
  for (const auto& name : draws.names) out << ',' << name;
  for (const auto& name : draws.names) out << ',' << name << "_plus";
  out << '\n';
  for (Eigen::Index i = 0; i < draws.meanX.rows(); ++i) {
    out << draws.subjectIds[i];
    for (Eigen::Index c = 0; c < draws.meanX.cols(); ++c) out << ',' << formatDouble(draws.meanX(i, c));
    for (Eigen::Index c = 0; c < draws.meanXt.cols(); ++c) out << ',' << formatDouble(draws.meanXt(i, c));
    out << '\n';
  }
}

IntakeTable readIntakes(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw dataError("cannot open intake file " + path);
  std::string line;
  if (!std::getline(in, line)) throw dataError(path + ": empty intake file");
  std::vector<std::vector<double>> rows;
  IntakeTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    char* end = nullptr;
    t.subjectIds.push_back(std::strtol(cell.c_str(), &end, 10));
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw dataError(path + ": bad number \"" + cell + "\"");
      row.push_back(v);
    }
    if (static_cast<int>(row.size()) != 2 * dim)
      throw dataError(path + ": expected " + std::to_string(2 * dim) + " values per row");
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  t.meanX.resize(n, dim);
  t.meanXt.resize(n, dim);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < dim; ++c) {
      t.meanX(i, c) = rows[i][c];
      t.meanXt(i, c) = rows[i][dim + c];
    }
  return t;
}

}  // namespace decon
