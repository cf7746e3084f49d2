#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decon/draws_io.hpp"
#include "decon/evaluate.hpp"
#include "decon/sampler.hpp"
#include "decon/simulate.hpp"

namespace decon {

struct FitSection {
  std::string data;
  std::vector<std::string> episodic;
  DrawFormat format = DrawFormat::Csv;
  Hyperparameters hyper;
};

struct EvaluateSection {
  std::string draws;
  std::string truth;
  bool truthAsEstimate = false;  // "estimate": "truth" scores the truth against itself
  std::string method = "copula-deconvolution";
};

struct ExportSection {
  std::string draws;
  GridSpec grid;
  bool rawUnits = true;
  std::optional<std::string> energy;  // component used as the denominator of Z
  int zPoints = 401;
};

struct DiagnoseSection {
  std::string draws, intakes, data;
  std::vector<std::string> episodic;
};

/// One run's configuration. Relative paths are resolved against the config file's folder.
struct RunConfig {
  std::string text;  // raw file contents, hashed into the manifest
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string output = ".";
  std::optional<ScenarioSpec> scenario;
  std::optional<FitSection> fit;
  std::optional<EvaluateSection> evaluate;
  std::optional<ExportSection> exportDensity;
  std::optional<DiagnoseSection> diagnose;
};

RunConfig parseConfig(const std::string& text, const std::string& baseDir = ".");
RunConfig loadConfig(const std::string& path);

/// Applies every known field of a JSON object to the defaults; unknown keys are errors.
Hyperparameters hyperFromJson(const std::string& text);
std::string hyperToJson(const Hyperparameters& hp);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace decon
