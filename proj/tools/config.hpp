#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diamond/curve.hpp"
#include "diamond/mc.hpp"
#include "diamond/rough_bergomi.hpp"
#include "diamond/rough_heston.hpp"

namespace diamonds::cli {

/// Malformed or inconsistent configuration; maps to the usage exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Family { black_scholes, rough_heston, rough_bergomi };

struct ModelConfig {
  Family family = Family::rough_heston;
  RHParams rh;
  RBParams rb;
  double sigma = 0.0;
};

struct GridConfig {
  int riccati_steps = 512;
  RBQuadrature quadrature;
  long paths = 100000;
  int steps = 256;
  bool antithetic = true;
  RHScheme scheme = RHScheme::ivi;
};

struct Tolerances {
  double fourier_cutoff = 1e-12;
  double calibration = 1e-8;
  int max_iterations = 5000;
  double z_max = 3.0;
};

struct CalibrationConfig {
  std::string term_structure;
  std::optional<std::pair<double, double>> init;
};

struct OutputConfig {
  std::string path;
  /// Empty selects the command default.
  std::string format;
};

/// Validated run configuration. Relative file names are resolved against the
/// directory of the configuration file.
struct RunConfig {
  ModelConfig model;
  std::optional<ForwardCurve> curve;
  std::vector<double> maturities;
  std::vector<double> strikes;
  GridConfig grid;
  Tolerances tolerances;
  std::uint64_t seed = 20240601;
  CalibrationConfig calibration;
  OutputConfig output;

  const ForwardCurve& require_curve() const;
  std::string family_name() const;
};

RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace diamonds::cli
