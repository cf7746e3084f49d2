// decon: simulate, fit, evaluate, export-density, diagnose.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "decon/config.hpp"
#include "decon/density_grid.hpp"
#include "decon/draws_io.hpp"
#include "decon/error.hpp"
#include "decon/evaluate.hpp"
#include "decon/kernels.hpp"
#include "decon/sampler.hpp"
#include "decon/simulate.hpp"

namespace fs = std::filesystem;
using namespace decon;

namespace {

constexpr const char* kVersion = "1.0.0";

/// Outputs are held in memory and published together: every file is written to a
/// temporary name first, then renamed. A failure part way removes what was written.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  void commit() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw dataError("cannot create output directory " + dir_.string() + ": " + ec.message());
    std::vector<fs::path> temps, finals;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path tmp = dir_ / (name + ".tmp");
        std::ofstream out(tmp, std::ios::binary);
        temps.push_back(tmp);
        out << content;
        out.close();
        if (!out) throw dataError("failed writing " + tmp.string());
      }
      for (std::size_t k = 0; k < files_.size(); ++k) {
        const fs::path target = dir_ / files_[k].first;
        fs::rename(temps[k], target);
        finals.push_back(target);
      }
    } catch (...) {
      for (const auto& p : temps) fs::remove(p, ec);
      for (const auto& p : finals) fs::remove(p, ec);
      throw;
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string manifest(const std::string& command, const RunConfig& cfg, const OutputSet& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = hex64(fnv1a(cfg.text));
  j["config"] = nlohmann::json::parse(cfg.text);
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["versions"] = {{"decon", kVersion},
                   {"compiler", __VERSION__},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION}};
  if (cfg.fit) j["resolved_hyper"] = nlohmann::json::parse(hyperToJson(cfg.fit->hyper));
  if (cfg.scenario) j["resolved_scenario"] = nlohmann::json::parse(scenarioToJson(*cfg.scenario));
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, content] : outputs.files())
    files.push_back({{"file", name}, {"fnv1a", hex64(fnv1a(content))}, {"bytes", content.size()}});
  j["outputs"] = files;
  return j.dump(2) + "\n";
}

std::uint64_t requireSeed(const RunConfig& cfg, const char* command) {
  if (!cfg.seed) throw configError(std::string(command) + ": config.seed is required");
  return *cfg.seed;
}

std::string scenarioId(const ScenarioSpec& s) {
  return std::string(s.kind == ScenarioKind::Main ? "main" : "lognormal") + "_q" + std::to_string(s.q) + "_p" +
         std::to_string(s.p) + "_n" + std::to_string(s.n) + "_m" + std::to_string(s.m) + "_seed" + std::to_string(s.seed);
}

std::string gridFileName(const DensityGrid& g) {
  std::string name = gridKindName(g.kind);
  for (std::size_t k = 0; k < g.components.size(); ++k) name += (k == 1 && g.kind == GridKind::EnergyAdjusted ? "_per_" : "_") + g.components[k];
  return name + ".csv";
}

void runSimulate(const RunConfig& cfg, OutputSet& out) {
  if (!cfg.scenario) throw configError("simulate: config.scenario is required");
  requireSeed(cfg, "simulate");
  const GroundTruth gt = generate(*cfg.scenario);
  std::ostringstream recalls, truth;
  writeRecallsCsv(gt.data, recalls);
  writeTruthSidecar(gt, truth);
  out.add("recalls.csv", recalls.str());
  out.add("truth.csv", truth.str());
}

void runFit(const RunConfig& cfg, OutputSet& out) {
  if (!cfg.fit) throw configError("fit: config.fit is required");
  const std::uint64_t seed = requireSeed(cfg, "fit");
  const FitSection& f = *cfg.fit;
  const RecallDataset data = scaleRecalls(readRecallsCsv(f.data, f.episodic));
  Sampler sampler(data, f.hyper, seed, Exec::Parallel);
  sampler.initialize();
  const long total = f.hyper.iterations;
  const PosteriorDraws draws = sampler.run([total](long done) {
    if (done % 500 == 0 || done == total) std::fprintf(stderr, "fit: %ld / %ld iterations\n", done, total);
  });
  std::ostringstream d, acc, intakes;
  writeDraws(draws, d, f.format);
  writeAcceptance(draws, acc);
  writeIntakes(draws, intakes);
  out.add(f.format == DrawFormat::Csv ? "draws.csv" : "draws.bin", d.str());
  out.add("acceptance.csv", acc.str());
  out.add("intakes.csv", intakes.str());
}

void runEvaluate(const RunConfig& cfg, OutputSet& out) {
  if (!cfg.evaluate) throw configError("evaluate: config.evaluate is required");
  const EvaluateSection& e = *cfg.evaluate;
  const TruthSidecar side = readTruthSidecar(e.truth);
  const auto truth = makeTruth(side.spec);
  const int d = static_cast<int>(side.names.size());
  IseReport rep;
  if (e.truthAsEstimate) {
    rep = iseReport(
        *truth, [&](int l, double x) { return truth->marginal(l, x).value; },
        [&](const Eigen::VectorXd& x) { return truth->joint(x).value; }, side.X, side.names, Exec::Parallel);
  } else {
    const PosteriorDraws draws = loadDraws(e.draws);
    const PosteriorDensity fit(draws);
    // Fit components may be ordered differently from the truth file.
    std::vector<int> map(d);
    for (int c = 0; c < d; ++c) {
      const auto it = std::find(fit.names().begin(), fit.names().end(), side.names[c]);
      if (it == fit.names().end()) throw dataError("evaluate: component \"" + side.names[c] + "\" is not in the draws");
      map[c] = static_cast<int>(it - fit.names().begin());
    }
    if (fit.dim() != d) throw dataError("evaluate: draws and truth have different component counts");
    rep = iseReport(
        *truth, [&](int l, double x) { return fit.marginal(map[l], x); },
        [&](const Eigen::VectorXd& x) {
          Eigen::VectorXd y(d);
          for (int c = 0; c < d; ++c) y[map[c]] = x[c];
          return fit.joint(y);
        },
        side.X, side.names, Exec::Parallel);
  }
  rep.scenario = scenarioId(side.spec);
  rep.method = e.method;
  std::ostringstream s;
  writeIseReport(rep, s);
  out.add("ise.csv", s.str());
}

void runExport(const RunConfig& cfg, OutputSet& out) {
  if (!cfg.exportDensity) throw configError("export-density: config.export is required");
  const ExportSection& x = *cfg.exportDensity;
  const PosteriorDraws draws = loadDraws(x.draws);
  const auto grids = estimateDensities(draws, x.grid, Exec::Parallel);
  for (const auto& g : grids) {
    std::ostringstream s;
    writeGridCsv(x.rawUnits ? toRawUnits(g) : g, s);
    out.add(gridFileName(g), s.str());
  }
  if (!x.energy) return;
  const PosteriorDensity fit(draws);
  const auto it = std::find(fit.names().begin(), fit.names().end(), *x.energy);
  if (it == fit.names().end()) throw configError("export.energy: unknown component \"" + *x.energy + "\"");
  const int b = static_cast<int>(it - fit.names().begin());
  auto meanOf = [&](int l) {
    for (const auto& g : grids)
      if (g.kind == GridKind::Marginal && g.components[0] == fit.names()[l])
        return trapezoid(g.axes[0], Eigen::VectorXd(g.axes[0].array() * g.values.array()));
    return 1.0;
  };
  for (int a = 0; a < fit.dim(); ++a) {
    if (a == b) continue;
    const DensityGrid g = energyAdjustedCovering(fit, a, b, 4.0 * meanOf(a) / meanOf(b), x.zPoints, Exec::Parallel);
    std::ostringstream s;
    writeGridCsv(x.rawUnits ? toRawUnits(g) : g, s);
    out.add(gridFileName(g), s.str());
  }
}

void runDiagnose(const RunConfig& cfg, OutputSet& out) {
  if (!cfg.diagnose) throw configError("diagnose: config.diagnose is required");
  const DiagnoseSection& g = *cfg.diagnose;
  const PosteriorDraws draws = loadDraws(g.draws);
  const PosteriorDensity fit(draws);
  RecallDataset data = readRecallsCsv(g.data, g.episodic);
  if (data.names != draws.names) throw dataError("diagnose: data components do not match the draws");
  for (auto& a : data.amounts)
    for (int c = 0; c < data.numComponents(); ++c) a.col(c) *= draws.scale[c];
  data.scale = draws.scale;
  const IntakeTable intakes = readIntakes(g.intakes, data.numComponents());
  if (intakes.subjectIds != data.subjectIds) throw dataError("diagnose: intake table subjects do not match the data");
  std::ostringstream s;
  writeResidualTable(residualDiagnostics(fit, data, intakes.meanXt), s);
  out.add("residuals.csv", s.str());
}

int exitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Data:
    case ErrorKind::Argument:
      return 3;
    case ErrorKind::Numerical:
      return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian copula density deconvolution for replicate recall data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&, OutputSet&);
  };
  const std::vector<Command> commands = {
      {"simulate", "Generate a synthetic recall dataset and its truth file", runSimulate},
      {"fit", "Run the MCMC sampler and write posterior draws", runFit},
      {"evaluate", "Score a fit (or the truth itself) by integrated squared error", runEvaluate},
      {"export-density", "Write posterior-mean density, variance and probability grids", runExport},
      {"diagnose", "Correlations of scaled residuals across adjacent occasions", runDiagnose}};

  std::string configPath, outputDir;
  int threads = -1;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", configPath, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
    sub->add_option("--output", outputDir, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = loadConfig(configPath);
    setThreadCount(threads >= 0 ? threads : cfg.threads);
    std::string dir = cfg.output;
    if (const char* env = std::getenv("DECON_OUTPUT_DIR"); env && *env) dir = env;
    if (!outputDir.empty()) dir = outputDir;

    for (const auto& c : commands) {
      if (!app.got_subcommand(c.name)) continue;
      OutputSet out(dir);
      c.run(cfg, out);
      out.add(std::string("manifest-") + c.name + ".json", manifest(c.name, cfg, out));
      out.commit();
      std::fprintf(stderr, "%s: wrote %zu files to %s\n", c.name, out.files().size(), dir.c_str());
    }
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exitCode(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
