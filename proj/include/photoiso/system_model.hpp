#pragma once
// Two-diabat torsional model on a periodic grid: Hamiltonian assembly,
// diagonalization, and operators in the truncated eigenbasis.
#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace photoiso {

enum class Surface { Ground, Excited };

// Potential parameters in eV (converted on use).
struct ModelParams {
  double W0 = 3.6;          // ground-state torsional barrier
  double W1 = 1.35;         // excited-state well depth
  double E1 = 2.48;         // vertical gap at alpha = 0
  double B = 8.5e-4;        // hbar^2 / 2m
  double coupling = 0.11;   // peak diabatic coupling lambda_c
  double sigma = 0.28;      // coupling width (rad)
  bool constant_coupling = false;
};

struct PotentialSet {
  std::function<double(double)> Vg, Ve, Vge;  // Hartree
  double B = 0.0;                              // Hartree
};

// Crossing angle of the cosine diabats; throws ConfigError if they never cross.
double crossing_angle(const ModelParams& p);
PotentialSet make_potentials(const ModelParams& p);

struct GridHamiltonian {
  int N = 0;
  Eigen::VectorXd alpha;  // N points on [-pi, pi)
  Eigen::MatrixXd H;      // 2N x 2N, g block first
};

Eigen::VectorXd periodic_grid(int N);
// Fourier (spectral) second-derivative kinetic matrix B * (-d^2/dalpha^2).
Eigen::MatrixXd kinetic_matrix(int N, double B);
GridHamiltonian build_hamiltonian(const PotentialSet& pot, int N);

// Closed angular interval on one surface.
struct WindowRange {
  Surface surface;
  double a, b;
};
// Union of intervals; all on the same or different surfaces.
using Window = std::vector<WindowRange>;

Window cis_window();
Window trans_window(bool symmetric);

// 0/1 mask over the 2N grid for a window.
Eigen::VectorXd window_mask(const Eigen::VectorXd& alpha, const Window& w);

struct TorsionalSystem {
  int N = 0;
  int full_dim = 0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd energies;  // M, ascending (Hartree)
  Eigen::MatrixXd vectors;   // 2N x M
  Eigen::MatrixXd mu;        // M x M, a.u.
  Eigen::MatrixXd Q;         // M x M, <i|cos alpha|j>
  Eigen::MatrixXd theta_cis, theta_trans, theta_e;
  Eigen::VectorXd w_cis, w_trans, w_e;  // diagonal window weights
  Eigen::VectorXd parity;               // +1 / -1 under alpha -> -alpha
  double mu_completeness = 0.0;         // truncated/full |mu|0>|^2
  double max_residual = 0.0;
  double orthonormality_error = 0.0;

  int size() const { return static_cast<int>(energies.size()); }
};

struct TruncationSpec {
  double energy_cutoff = 0.0;  // absolute, Hartree; <= 0 disables
  int max_states = 300;
};

TorsionalSystem diagonalize(const GridHamiltonian& gh, const TruncationSpec& trunc,
                            double mu0, const Window& cis, const Window& trans);

// Projector of a window rotated into the retained eigenbasis.
Eigen::MatrixXd window_projector(const TorsionalSystem& sys, const Window& w);

struct SystemConfig {
  ModelParams model;
  int N = 256;
  double cutoff_above_E1_eV = 1.0;
  int max_states = 300;
  double mu0_debye = 10.0;
  bool symmetric_trans = true;
};

TorsionalSystem build_system(const SystemConfig& cfg);

}  // namespace photoiso
