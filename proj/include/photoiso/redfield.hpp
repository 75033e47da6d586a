#pragma once
// Secular Redfield model: transition rates, dephasing rates and the density
// matrix propagator with an explicit dipole-field term.
#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "photoiso/bath.hpp"
#include "photoiso/system_model.hpp"

namespace photoiso {

using cd = std::complex<double>;

// Rate matrices follow the convention w(j, i) = rate i -> j (a.u.).
struct RedfieldModel {
  Eigen::VectorXd energies;
  Eigen::MatrixXd omega;     // omega(i, j) = lambda_i - lambda_j
  Eigen::MatrixXd w_env;     // environment channel
  Eigen::MatrixXd w_spont;   // spontaneous emission A (downward only)
  Eigen::MatrixXd w_rad;     // C * B * W, both directions
  Eigen::MatrixXd gamma;     // dephasing, symmetric, zero diagonal
  Eigen::MatrixXd mu, Q;
  double C = 0.0;
  std::vector<std::pair<int, int>> degenerate_pairs;  // |omega| < 1e-6 a.u.

  Eigen::MatrixXd w_total() const { return w_env + w_spont + w_rad; }
  int size() const { return static_cast<int>(energies.size()); }
};

inline constexpr double kDegenerateOmega = 1e-6;

// Generator K with K(j,i) = w(j,i) for i != j and K(i,i) = -sum_j w(j,i).
Eigen::MatrixXd rate_generator(const Eigen::MatrixXd& w);

RedfieldModel assemble_rates(const TorsionalSystem& sys, const BathSpec& bath);

// --- environment correlation function and half-Fourier integrals ----------

std::complex<double> trigamma(std::complex<double> z);

// C(tau) for eta = 1; exact closed form for the exponential-cutoff Ohmic bath.
std::complex<double> env_correlation(double tau, double omega_c, double kT);

struct QuadratureSpec {
  double step_fs = 0.5;
  double horizon_fs = 5000.0;
  double tolerance = 1e-3;  // relative, for the self-convergence check
  bool check = true;
};

struct HalfFourier {
  Eigen::MatrixXd re;  // re(i,k) = Re  int_0^inf C(t) e^{i omega_ik t} dt  (eta = 1)
  Eigen::MatrixXd im;  // imaginary parts (level-shift contributions)
  double zero_re = 0.0;
};

// Evaluate the half-Fourier transforms at every Bohr frequency omega(i,k) of
// the model (and zero frequency) by trapezoidal quadrature in tau with an
// analytic 1/tau^2 tail correction.
HalfFourier env_half_fourier(const Eigen::MatrixXd& omega, const BathSpec& bath,
                             const QuadratureSpec& q);

struct DephasingReport {
  double convergence_error = 0.0;   // max relative change under refinement
  double max_level_shift = 0.0;     // a.u.; reported, not applied
  Eigen::VectorXd level_shifts;
};

// gamma_ij = sum_k [Q_ik^2 G(w_ik) + Q_jk^2 G(w_jk)] - 2 Q_ii Q_jj G(0), with
// G the real half-Fourier integral of the environment correlation function.
Eigen::MatrixXd assemble_dephasing(const RedfieldModel& m, const BathSpec& bath,
                                   const QuadratureSpec& q = {}, bool include_spontaneous = false,
                                   DephasingReport* report = nullptr);

// --- pulse ------------------------------------------------------------------

enum class Envelope { Gaussian, Sin2 };

struct PulseSpec {
  double E0 = 4.0e9;            // V/m
  double omega0_cm = 2.0e4;     // carrier, cm^-1
  double fwhm_fs = 2.5;         // field-envelope FWHM
  double t0_fs = 10.0;
  Envelope shape = Envelope::Sin2;

  void validate() const;
  double envelope(double t_au) const;
  // Half width of the interval where the envelope exceeds `level`.
  double active_half_width(double level = 1e-4) const;
};

double field(double t_au, const PulseSpec& p);  // a.u.
double field_Vm(double t_fs, const PulseSpec& p);
// Integral of E(t)^2 dt in (V/m)^2 s by quadrature.
double pulse_fluence(const PulseSpec& p);

// --- propagation -------------------------------------------------------------

struct DensityState {
  Eigen::MatrixXcd rho;
  double t = 0.0;  // a.u.
};

DensityState ground_state(int M);
DensityState boltzmann_state(const Eigen::VectorXd& energies, double kT);

struct PropagationOptions {
  double max_step_on_fs = 0.05;
  double max_step_off_fs = 1.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  double step_scale = 1.0;   // multiplies both max steps (convergence studies)
  double trace_abort = 1e-6;
  bool field_on = true;
  bool exact_field_free = true;  // closed-form propagation while E(t) = 0
};

struct Trajectory {
  std::vector<double> t_fs, P_cis, P_trans, P_e, trace, min_pop;
  double max_trace_drift = 0.0;
  double max_hermiticity = 0.0;
  double min_population = 1.0;
  long steps = 0, rejected = 0;
  DensityState final_state;
};

Trajectory propagate(const DensityState& rho0, const RedfieldModel& model, const PulseSpec& pulse,
                     const std::vector<double>& t_grid_fs, const Eigen::MatrixXd& theta_cis,
                     const Eigen::MatrixXd& theta_trans, const PropagationOptions& opt = {});

}  // namespace photoiso
