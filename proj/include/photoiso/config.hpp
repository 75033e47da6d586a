#pragma once
// Scenario configuration: a flat, sectioned key = value text format.
#include <cstdint>
#include <string>
#include <vector>

#include "photoiso/bath.hpp"
#include "photoiso/redfield.hpp"
#include "photoiso/system_model.hpp"

namespace photoiso {

struct ScenarioConfig {
  SystemConfig system;

  // bath
  double omega_c_cm = 300.0;
  double T_env = 300.0;
  double T_rad = 4100.0;
  double scale_denominator = 4.0e10;
  std::vector<double> etas{12.5, 25.0, 50.0};
  std::vector<double> luminances{0.015, 0.03, 0.06};
  double eta_ref = 25.0;       // eta for luminance sweeps
  double L_ref = 0.03;         // luminance for eta sweeps

  // coherent pulse run
  PulseSpec pulse;
  double coherent_t_end_fs = 6000.0;
  double coherent_dt_out_fs = 5.0;
  std::string initial_state = "ground";  // ground | boltzmann
  PropagationOptions propagation;
  QuadratureSpec quadrature;
  bool dephasing_include_spontaneous = false;

  // incoherent run
  double incoherent_t_min = 1e-15;
  double incoherent_t_max = 1.0;
  int incoherent_points_per_octave = 16;
  double fit_end_eta = 2.5e-8;  // fit window ends at fit_end_eta / eta seconds

  // response statistics
  double molecules = 4.0e9;
  int response_threshold = 3;
  double response_horizon_s = 25e-3;

  // run
  std::string out_dir = "out";
  std::uint64_t seed = 20240101;
  int threads = 1;

  BathSpec bath(double eta, double L) const;
  void validate() const;  // throws ConfigError
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

}  // namespace photoiso
