#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace diamonds::cli {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
  return x;
}

long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<long>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::string resolve(const std::string& file, const std::string& base) {
  std::filesystem::path p(file);
  if (p.is_absolute()) return file;
  return (std::filesystem::path(base) / p).string();
}

ModelConfig parse_model(const json& j) {
  if (!j.is_object() || !j.contains("family")) throw ConfigError("model: missing 'family'");
  const std::string family = text(j["family"], "model.family");
  ModelConfig m;
  if (family == "black_scholes") {
    expect_keys(j, "model", {"family", "sigma"});
    if (!j.contains("sigma")) throw ConfigError("model: black_scholes needs 'sigma'");
    m.family = Family::black_scholes;
    m.sigma = number(j["sigma"], "model.sigma");
    if (!(m.sigma > 0.0)) throw ConfigError("model.sigma: must be positive");
  } else if (family == "rough_heston") {
    expect_keys(j, "model", {"family", "nu", "H", "rho", "lambda"});
    for (const char* k : {"nu", "H", "rho"})
      if (!j.contains(k)) throw ConfigError(std::string("model: rough_heston needs '") + k + "'");
    m.family = Family::rough_heston;
    m.rh.nu = number(j["nu"], "model.nu");
    m.rh.alpha = number(j["H"], "model.H") + 0.5;
    m.rh.rho = number(j["rho"], "model.rho");
    if (j.contains("lambda")) m.rh.lambda = number(j["lambda"], "model.lambda");
    try {
      m.rh.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
  } else if (family == "rough_bergomi") {
    expect_keys(j, "model", {"family", "eta", "H", "rho"});
    for (const char* k : {"eta", "H", "rho"})
      if (!j.contains(k)) throw ConfigError(std::string("model: rough_bergomi needs '") + k + "'");
    m.family = Family::rough_bergomi;
    m.rb.eta = number(j["eta"], "model.eta");
    m.rb.H = number(j["H"], "model.H");
    m.rb.rho = number(j["rho"], "model.rho");
    try {
      m.rb.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
  } else {
    throw ConfigError("model.family: unknown family '" + family + "'");
  }
  return m;
}

ForwardCurve parse_curve(const json& j, const std::string& base) {
  expect_keys(j, "curve", {"flat", "path", "interpolation"});
  if (j.contains("flat") == j.contains("path"))
    throw ConfigError("curve: give exactly one of 'flat' and 'path'");
  if (j.contains("flat")) {
    if (j.contains("interpolation")) throw ConfigError("curve: 'interpolation' needs 'path'");
    const double xi = number(j["flat"], "curve.flat");
    if (!(xi > 0.0)) throw ConfigError("curve.flat: must be positive");
    return ForwardCurve::flat(xi);
  }
  Interpolation interp = Interpolation::flat_forward;
  if (j.contains("interpolation")) {
    const std::string name = text(j["interpolation"], "curve.interpolation");
    if (name == "linear") {
      interp = Interpolation::linear;
    } else if (name != "flat_forward") {
      throw ConfigError("curve.interpolation: expected 'flat_forward' or 'linear'");
    }
  }
  const std::string path = resolve(text(j["path"], "curve.path"), base);
  try {
    return ForwardCurve::from_csv(path, interp);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("curve: ") + e.what());
  }
}

std::vector<double> parse_strikes(const json& j) {
  if (j.is_array()) return number_list(j, "strikes");
  expect_keys(j, "strikes", {"min", "max", "step"});
  for (const char* k : {"min", "max", "step"})
    if (!j.contains(k)) throw ConfigError(std::string("strikes: missing '") + k + "'");
  const double lo = number(j["min"], "strikes.min");
  const double hi = number(j["max"], "strikes.max");
  const double step = number(j["step"], "strikes.step");
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("strikes: need step > 0 and max >= min");
  const long n = std::lround((hi - lo) / step);
  if (n > 100000) throw ConfigError("strikes: too many points");
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

GridConfig parse_grid(const json& j) {
  expect_keys(j, "grid", {"riccati_steps", "quadrature", "paths", "steps", "antithetic", "scheme"});
  GridConfig g;
  if (j.contains("riccati_steps")) g.riccati_steps = static_cast<int>(integer(j["riccati_steps"], "grid.riccati_steps"));
  if (g.riccati_steps < 64) throw ConfigError("grid.riccati_steps: must be at least 64");
  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    if (!q.is_array() || q.size() != 3) throw ConfigError("grid.quadrature: expected [outer, middle, inner]");
    g.quadrature = {static_cast<int>(integer(q[0], "grid.quadrature[0]")),
                    static_cast<int>(integer(q[1], "grid.quadrature[1]")),
                    static_cast<int>(integer(q[2], "grid.quadrature[2]"))};
    if (g.quadrature.outer < 1 || g.quadrature.middle < 1 || g.quadrature.inner < 1)
      throw ConfigError("grid.quadrature: node counts must be positive");
  }
  if (j.contains("paths")) g.paths = integer(j["paths"], "grid.paths");
  if (j.contains("steps")) g.steps = static_cast<int>(integer(j["steps"], "grid.steps"));
  if (g.paths < 2 || g.steps < 1) throw ConfigError("grid: need paths >= 2 and steps >= 1");
  if (j.contains("antithetic")) {
    if (!j["antithetic"].is_boolean()) throw ConfigError("grid.antithetic: expected a boolean");
    g.antithetic = j["antithetic"].get<bool>();
  }
  if (j.contains("scheme")) {
    const std::string s = text(j["scheme"], "grid.scheme");
    if (s == "euler") {
      g.scheme = RHScheme::euler;
    } else if (s != "ivi") {
      throw ConfigError("grid.scheme: expected 'ivi' or 'euler'");
    }
  }
  return g;
}

Tolerances parse_tolerances(const json& j) {
  expect_keys(j, "tolerances", {"fourier_cutoff", "calibration", "max_iterations", "z_max"});
  Tolerances t;
  if (j.contains("fourier_cutoff")) t.fourier_cutoff = number(j["fourier_cutoff"], "tolerances.fourier_cutoff");
  if (j.contains("calibration")) t.calibration = number(j["calibration"], "tolerances.calibration");
  if (j.contains("max_iterations"))
    t.max_iterations = static_cast<int>(integer(j["max_iterations"], "tolerances.max_iterations"));
  if (j.contains("z_max")) t.z_max = number(j["z_max"], "tolerances.z_max");
  if (!(t.fourier_cutoff > 0.0 && t.fourier_cutoff < 1e-3))
    throw ConfigError("tolerances.fourier_cutoff: must lie in (0, 1e-3)");
  if (!(t.calibration > 0.0)) throw ConfigError("tolerances.calibration: must be positive");
  if (t.max_iterations < 1) throw ConfigError("tolerances.max_iterations: must be positive");
  if (!(t.z_max > 0.0)) throw ConfigError("tolerances.z_max: must be positive");
  return t;
}

}  // namespace

const ForwardCurve& RunConfig::require_curve() const {
  if (!curve) throw ConfigError("config: this command needs a 'curve' block");
  return *curve;
}

std::string RunConfig::family_name() const {
  switch (model.family) {
    case Family::black_scholes: return "black_scholes";
    case Family::rough_heston: return "rough_heston";
    case Family::rough_bergomi: return "rough_bergomi";
  }
  return "";
}

RunConfig parse_config(const std::string& source, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  expect_keys(j, "config", {"model", "curve", "maturities", "strikes", "grid", "tolerances", "seed",
                            "calibration", "output"});
  RunConfig c;
  if (j.contains("model")) c.model = parse_model(j["model"]);
  if (j.contains("curve")) c.curve = parse_curve(j["curve"], base_dir);
  if (j.contains("maturities")) {
    c.maturities = number_list(j["maturities"], "maturities");
    for (double T : c.maturities)
      if (!(T > 0.0)) throw ConfigError("maturities: must be positive");
  }
  if (j.contains("strikes")) c.strikes = parse_strikes(j["strikes"]);
  if (j.contains("grid")) c.grid = parse_grid(j["grid"]);
  if (j.contains("tolerances")) c.tolerances = parse_tolerances(j["tolerances"]);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("calibration")) {
    const auto& cal = j["calibration"];
    expect_keys(cal, "calibration", {"term_structure", "init"});
    if (cal.contains("term_structure"))
      c.calibration.term_structure = resolve(text(cal["term_structure"], "calibration.term_structure"), base_dir);
    if (cal.contains("init")) {
      const auto v = number_list(cal["init"], "calibration.init");
      if (v.size() != 2) throw ConfigError("calibration.init: expected [rho_nu, H]");
      c.calibration.init = std::make_pair(v[0], v[1]);
    }
  }
  if (j.contains("output")) {
    const auto& out = j["output"];
    expect_keys(out, "output", {"path", "format"});
    if (out.contains("path")) c.output.path = resolve(text(out["path"], "output.path"), base_dir);
    if (out.contains("format")) {
      c.output.format = text(out["format"], "output.format");
      if (c.output.format != "csv" && c.output.format != "json")
        throw ConfigError("output.format: expected 'csv' or 'json'");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace diamonds::cli
