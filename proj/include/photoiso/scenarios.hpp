#pragma once
// Scenario orchestration: single runs, the four figure reproductions, the
// invariant suite, and CSV/SVG emission.
#include <string>
#include <vector>

#include "photoiso/config.hpp"
#include "photoiso/kinetics.hpp"
#include "photoiso/redfield.hpp"

namespace photoiso {

// Reference transition used for the photoexcitation rate k1 = C B W.
inline constexpr double kReferenceTransitionCm = 2.0e4;

// k1 in s^-1 for dipole mu (Debye) at frequency omega (cm^-1).
double photoexcitation_rate(const ScenarioConfig& cfg, double L, double mu_debye,
                            double omega_cm = kReferenceTransitionCm);
double photoexcitation_rate(const ScenarioConfig& cfg, double L);  // mu = system.mu0

// --- coherent pulse ----------------------------------------------------------

struct PulseResult {
  double eta = 0.0;
  Trajectory traj;
  DephasingReport dephasing;
  double P_cis0 = 0.0;
  double excited_after_pulse = 0.0;  // 1 - P_cis right after the field ends
  double plateau = 0.0;              // P_trans at the end of the horizon
  double quantum_yield = 0.0;        // plateau / excited_after_pulse
  double rise_fs = 0.0;              // 63% of plateau, measured from the pulse centre
};

std::vector<double> uniform_grid_fs(double t_end, double dt);

PulseResult run_pulse(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta,
                      const std::vector<double>& t_grid_fs, const PropagationOptions& opt);
PulseResult run_pulse(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta);

// --- incoherent light --------------------------------------------------------

struct IncoherentResult {
  double eta = 0.0, L = 0.0;
  PopulationSeries series;
  SlopeFit fit;
  double k1 = 0.0;
  KineticModel reference;        // three-state constants with the fixed ratios
  KineticModel fitted;           // k2 = k4 fitted to the Redfield onset
  double slope_three_state = 0.0;
  double discrepancy = 0.0;      // 1 - slope_three_state / s
};

IncoherentResult run_incoherent(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta,
                                double L);

// --- invariants --------------------------------------------------------------

// max over i != j of |w_ji e^{-E_i/kT} - w_ij e^{-E_j/kT}| / max(both)
double detailed_balance_error(const Eigen::MatrixXd& w, const Eigen::VectorXd& energies, double kT);
double relative_entropy(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
// KL divergence of the dark stationary state from Boltzmann at T_env,
// starting from sector masses that match the Boltzmann distribution.
double dark_equilibrium_divergence(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta);

struct Check {
  std::string name;
  double value = 0.0, tolerance = 0.0;
  bool pass = false;
};

struct ValidationOptions {
  bool grid_doubling = true;
  bool step_halving = true;
  double step_halving_t_end_fs = 400.0;
};

std::vector<Check> run_validation(const ScenarioConfig& cfg, const TorsionalSystem& sys,
                                  const ValidationOptions& opt = {});

// --- figure reproductions ----------------------------------------------------

struct FigureOutput {
  std::vector<std::string> files;
  std::vector<std::string> notes;
};

void write_file_atomic(const std::string& path, const std::string& content);
std::string eigens_csv(const TorsionalSystem& sys);

FigureOutput run_eigens(const ScenarioConfig& cfg, const TorsionalSystem& sys);
FigureOutput run_figure1(const ScenarioConfig& cfg, const TorsionalSystem& sys,
                         std::vector<PulseResult>* results = nullptr);
FigureOutput run_figure2(const ScenarioConfig& cfg, const TorsionalSystem& sys,
                         std::vector<IncoherentResult>* results = nullptr);
FigureOutput run_figure3(const ScenarioConfig& cfg, double slope_ref);
FigureOutput run_figure4(const ScenarioConfig& cfg, const std::vector<IncoherentResult>& runs);

// Runs fn(0..n-1) on up to `threads` workers; results are returned in index order.
template <class R, class F>
std::vector<R> parallel_map(int n, int threads, F fn);

}  // namespace photoiso

#include "photoiso/detail/parallel.hpp"
