#pragma once

// JSON run configuration. Every section and key is optional; unknown keys
// are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfa/attractor.hpp"

namespace pfa {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ForcingSpec {
  /// "zero", "random", "taylor_green" or "modes".
  std::string type = "zero";
  double amplitude = 1.0;  ///< random: |g|_L2; taylor_green: a
  double kmax = 4.0;
  std::optional<std::uint64_t> seed;  ///< random; defaults to the run seed
  std::vector<Mode> modes;            ///< streamfunction modes
};

struct InitialSpec {
  /// "zero", "random" or "taylor_green".
  std::string type = "random";
  double level = 1.0;  ///< random: ||.||_Y
  double kmax = 4.0;
  double amplitude = 1.0;  ///< taylor_green
  double phi = 0.0;        ///< taylor_green: constant phase value
};

struct RunConfig {
  int nx = 32;
  int ny = 32;
  double pad_factor = 2.0;

  PhysicalConstants constants{};
  std::vector<double> potential{0.0, -1.0, 0.0, 1.0};
  double F0 = 0.25;
  std::optional<double> c_F_gamma;
  ForcingSpec forcing;

  StepperConfig stepper{};
  InitialSpec initial;

  long n_steps = 100;
  long snapshot_stride = 1;
  std::string csv = "diagnostics.csv";
  std::string snapshot_dir = "snapshots";

  // Ensemble / sampling defaults for converge and attractor.
  int ensemble = 8;
  double ensemble_level = 1.0;
  double burn_in_time = 10.0;
  long samples = 4;
  double stride_time = 1.0;
  int finite_time_starts = 0;

  std::uint64_t seed = 1;
};

/// Parses and validates; model parameters are checked by building them.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON with every field explicit.
std::string to_json(const RunConfig& c);

GridSpec make_grid(const RunConfig& c);
SolenoidalVector make_forcing(const RunConfig& c, const GridSpec& g);
ModelParams make_params(const RunConfig& c);
State make_initial(const RunConfig& c, const ModelParams& p);
StudyConfig make_study(const RunConfig& c);

}  // namespace pfa
