#pragma once
// Population kinetics under incoherent light: master-equation propagation over
// many decades of time, slope/onset extraction, a three-state rate model and
// response statistics.
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "photoiso/redfield.hpp"

namespace photoiso {

struct RateNetwork {
  Eigen::MatrixXd K;  // generator; K(j,i) = rate i -> j, columns sum to zero
  Eigen::VectorXd w_cis, w_trans, w_e;
  Eigen::VectorXd energies;
  int size() const { return static_cast<int>(K.rows()); }
  double column_sum_error() const;
};

RateNetwork make_network(const RedfieldModel& model, const TorsionalSystem& sys);

// Communicating classes of the rate graph (strongly connected components).
std::vector<std::vector<int>> communicating_classes(const Eigen::MatrixXd& K);

// Stationary distribution reached from p0, computed class by class with the
// subtraction-free Grassmann-Taksar-Heyman elimination. Requires every class
// to be closed (no transient states feeding two classes).
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& K, const Eigen::VectorXd& p0);

// Thermal population of the cis isomer: Boltzmann weights on states whose
// dominant window is cis, zero elsewhere.
Eigen::VectorXd thermal_cis_populations(const RateNetwork& net, double kT);

struct LogGrid {
  double t_min = 1e-15;        // s
  double t_max = 1.0;          // s
  int points_per_octave = 16;
  std::vector<double> times() const;  // excludes t = 0
};

struct PopulationSeries {
  std::vector<double> t, P_cis, P_trans, P_e, total;
  std::string method;   // "spectral" or "uniformization"
  std::vector<std::string> warnings;
  Eigen::VectorXd final_populations;
};

// Exact propagation p(t) = exp(K t) p0 on the grid. The eigen-decomposition is
// used when its conditioning allows full relative accuracy; otherwise falls
// back to a positivity-preserving scaling-and-squaring exponential.
PopulationSeries propagate_populations(const RateNetwork& net, const Eigen::VectorXd& p0,
                                       const LogGrid& grid, bool force_fallback = false);

// exp(K t) for a generator K, entrywise accurate (uniformization + squaring).
Eigen::MatrixXd generator_exponential(const Eigen::MatrixXd& K, double t);

struct SlopeFit {
  double slope = 0.0, intercept = 0.0, t_c = 0.0;
  double r2 = 0.0, max_fit_residual = 0.0;
  int fit_points = 0;
  double decades_beyond_tc = 0.0;
};

// Least-squares line over the final decade; t_c is the earliest time after
// which the relative deviation from that line stays below `threshold`.
SlopeFit extract_slope_and_onset(const std::vector<double>& t, const std::vector<double>& P,
                                 double threshold = 0.01);

struct KineticModel {
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0;  // s^-1
  void validate() const;
  double slope() const;  // k1 k4 / (k2 + k4)
  double onset() const;  // 3 / (k2 + k4)
};

// Rate constants with k2 = k4 = 0.08 eta ps^-1, k3 = k4 * 1.87e-9.
KineticModel reference_three_state(double eta, double k1);

// Map a Redfield slope/onset onto three-state constants.
KineticModel fit_three_state(double k1, double slope, double t_c, bool equal_k2_k4 = true);

struct ThreeStateSeries {
  std::vector<double> t, PA, PB, PC;
};
ThreeStateSeries three_state_solve(const KineticModel& m, const std::vector<double>& t,
                                   const Eigen::Vector3d& p0 = Eigen::Vector3d(1, 0, 0));
Eigen::Matrix3d three_state_generator(const KineticModel& m);

// P(at least n0 of N) for per-molecule probability p.
double response_probability(double p, double N, int n0 = 3);
double response_probability_binomial(double p, double N, int n0 = 3);
double response_probability_poisson(double lambda, int n0 = 3);

struct ResponseCurve {
  double L = 0.0, slope = 0.0;
  std::vector<double> t, P3;
  double t_half = 0.0;  // time where P3 = 0.5 (s)
};

// P3(t) for p(t) = slope(L) * t with slope proportional to L.
std::vector<ResponseCurve> response_curve(double slope_ref, double L_ref, const std::vector<double>& Ls,
                                          double N, const std::vector<double>& t, int n0 = 3);
// Time at which P3 crosses `level` for p = s t.
double response_crossing_time(double slope, double N, double level = 0.5, int n0 = 3);

}  // namespace photoiso
