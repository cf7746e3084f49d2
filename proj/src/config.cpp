#include "decon/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "decon/error.hpp"

namespace decon {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Field {
  const char* key;
  std::variant<double*, int*> target;
};

std::vector<Field> hyperFields(Hyperparameters& h) {
  return {{"lower", &h.lower},
          {"upper", &h.upper},
          {"num_bases", &h.numBases},
          {"k_x", &h.kX},
          {"k_eps", &h.kEps},
          {"alpha_x", &h.alphaX},
          {"alpha_eps", &h.alphaEps},
          {"a_xi", &h.aXi},
          {"b_xi", &h.bXi},
          {"a_beta", &h.aBeta},
          {"b_beta", &h.bBeta},
          {"a_vartheta", &h.aVartheta},
          {"b_vartheta", &h.bVartheta},
          {"mu_x0", &h.muX0},
          {"var_x0", &h.varX0},
          {"a_var_x0", &h.aVarX0},
          {"b_var_x0", &h.bVarX0},
          {"var_mu_tilde", &h.varMuTilde},
          {"a_eps", &h.aEps},
          {"b_eps", &h.bEps},
          {"mu_beta0", &h.muBeta0},
          {"var_beta0", &h.varBeta0},
          {"init_smooth_var", &h.initSmoothVar},
          {"prop_xi", &h.propXi},
          {"prop_vartheta", &h.propVartheta},
          {"prop_x", &h.propX},
          {"prop_mu_x", &h.propMuX},
          {"prop_var_x", &h.propVarX},
          {"prop_p_eps", &h.propPEps},
          {"prop_mu_tilde", &h.propMuTilde},
          {"prop_var_eps", &h.propVarEps},
          {"grid_size", &h.gridSize},
          {"iterations", &h.iterations},
          {"burnin", &h.burnin},
          {"thin", &h.thin},
          {"adapt_every", &h.adaptEvery},
          {"adapt_low", &h.adaptLow},
          {"adapt_high", &h.adaptHigh},
          {"warmup_sweeps", &h.warmupSweeps}};
}

Hyperparameters hyperFrom(const json& j, const std::string& where) {
  Hyperparameters h;
  if (!j.is_object()) throw configError(where + " must be an object");
  auto fields = hyperFields(h);
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return key == f.key; });
    if (it == fields.end()) throw configError(where + ": unknown field \"" + key + "\"");
    if (auto* d = std::get_if<double*>(&it->target)) {
      if (!value.is_number()) throw configError(where + "." + key + " must be a number");
      **d = value.get<double>();
    } else {
      if (!value.is_number_integer()) throw configError(where + "." + key + " must be an integer");
      *std::get<int*>(it->target) = value.get<int>();
    }
  }
  try {
    h.validate();
  } catch (const Error& e) {
    throw configError(where + ": " + e.what());
  }
  return h;
}

void checkKeys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw configError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw configError(where + ": unknown field \"" + key + "\"");
  }
}

std::string pathField(const json& j, const std::string& where, const char* key, const fs::path& base) {
  if (!j.contains(key)) throw configError(where + "." + key + " is required");
  if (!j[key].is_string()) throw configError(where + "." + key + " must be a string");
  const fs::path p(j[key].get<std::string>());
  return (p.is_absolute() ? p : base / p).lexically_normal().string();
}

std::vector<std::string> stringList(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_array()) throw configError(where + "." + key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw configError(where + "." + key + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

int intField(const json& j, const std::string& where, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw configError(where + "." + key + " must be an integer");
  return j[key].get<int>();
}

}  // namespace

Hyperparameters hyperFromJson(const std::string& text) { return hyperFrom(json::parse(text), "fit.hyper"); }

std::string hyperToJson(const Hyperparameters& hp) {
  Hyperparameters copy = hp;
  json j = json::object();
  for (const auto& f : hyperFields(copy)) {
    if (auto* d = std::get_if<double*>(&f.target)) j[f.key] = **d;
    else j[f.key] = *std::get<int*>(f.target);
  }
  return j.dump();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

RunConfig parseConfig(const std::string& text, const std::string& baseDir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line and column for the message.
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw configError("config line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  checkKeys(root, "config", {"seed", "threads", "output", "scenario", "fit", "evaluate", "export", "diagnose"});
  const fs::path base(baseDir);
  RunConfig cfg;
  cfg.text = text;
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw configError("config.seed must be a nonnegative integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  cfg.threads = intField(root, "config", "threads", 0);
  if (root.contains("output")) {
    if (!root["output"].is_string()) throw configError("config.output must be a string");
    const fs::path p(root["output"].get<std::string>());
    cfg.output = (p.is_absolute() ? p : base / p).lexically_normal().string();
  } else {
    cfg.output = base.lexically_normal().string();
  }

  if (root.contains("scenario")) {
    json s = root["scenario"];
    if (!s.is_object()) throw configError("config.scenario must be an object");
    if (cfg.seed) s["seed"] = *cfg.seed;
    cfg.scenario = scenarioFromJson(s.dump());
  }
  if (root.contains("fit")) {
    const json& f = root["fit"];
    checkKeys(f, "fit", {"data", "episodic", "draw_format", "hyper"});
    FitSection fit;
    fit.data = pathField(f, "fit", "data", base);
    fit.episodic = stringList(f, "fit", "episodic");
    if (f.contains("draw_format")) {
      if (!f["draw_format"].is_string()) throw configError("fit.draw_format must be a string");
      fit.format = parseDrawFormat(f["draw_format"].get<std::string>());
    }
    if (f.contains("hyper")) fit.hyper = hyperFrom(f["hyper"], "fit.hyper");
    cfg.fit = fit;
  }
  if (root.contains("evaluate")) {
    const json& e = root["evaluate"];
    checkKeys(e, "evaluate", {"draws", "truth", "estimate", "method"});
    EvaluateSection ev;
    ev.truth = pathField(e, "evaluate", "truth", base);
    const std::string estimate = e.value("estimate", std::string("fit"));
    if (estimate != "fit" && estimate != "truth") throw configError("evaluate.estimate must be \"fit\" or \"truth\"");
    ev.truthAsEstimate = estimate == "truth";
    if (!ev.truthAsEstimate) ev.draws = pathField(e, "evaluate", "draws", base);
    if (e.contains("method")) {
      if (!e["method"].is_string()) throw configError("evaluate.method must be a string");
      ev.method = e["method"].get<std::string>();
    } else if (ev.truthAsEstimate) {
      ev.method = "truth";
    }
    cfg.evaluate = ev;
  }
  if (root.contains("export")) {
    const json& x = root["export"];
    checkKeys(x, "export", {"draws", "points", "pair_points", "pairs", "error_half_width", "raw_units", "energy", "z_points"});
    ExportSection ex;
    ex.draws = pathField(x, "export", "draws", base);
    ex.grid.points = intField(x, "export", "points", ex.grid.points);
    ex.grid.pairPoints = intField(x, "export", "pair_points", ex.grid.pairPoints);
    if (x.contains("pairs")) {
      if (!x["pairs"].is_boolean()) throw configError("export.pairs must be a boolean");
      ex.grid.pairs = x["pairs"].get<bool>();
    }
    if (x.contains("error_half_width")) {
      if (!x["error_half_width"].is_number()) throw configError("export.error_half_width must be a number");
      ex.grid.errorHalfWidth = x["error_half_width"].get<double>();
    }
    if (x.contains("raw_units")) {
      if (!x["raw_units"].is_boolean()) throw configError("export.raw_units must be a boolean");
      ex.rawUnits = x["raw_units"].get<bool>();
    }
    if (x.contains("energy") && !x["energy"].is_null()) {
      if (!x["energy"].is_string()) throw configError("export.energy must be a component name");
      ex.energy = x["energy"].get<std::string>();
    }
    ex.zPoints = intField(x, "export", "z_points", ex.zPoints);
    if (ex.grid.points < 2 || ex.grid.pairPoints < 2 || ex.zPoints < 2)
      throw configError("export: point counts must be at least 2");
    cfg.exportDensity = ex;
  }
  if (root.contains("diagnose")) {
    const json& g = root["diagnose"];
    checkKeys(g, "diagnose", {"draws", "intakes", "data", "episodic"});
    DiagnoseSection dg;
    dg.draws = pathField(g, "diagnose", "draws", base);
    dg.intakes = pathField(g, "diagnose", "intakes", base);
    dg.data = pathField(g, "diagnose", "data", base);
    dg.episodic = stringList(g, "diagnose", "episodic");
    cfg.diagnose = dg;
  }
  return cfg;
}

RunConfig loadConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw configError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path dir = fs::path(path).parent_path();
  return parseConfig(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace decon
