#include "photoiso/system_model.hpp"

#include <cmath>
#include <string>

#include "photoiso/errors.hpp"
#include "photoiso/units.hpp"

namespace photoiso {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double crossing_angle(const ModelParams& p) {
  // (W0/2)(1-c) = E1 - (W1/2)(1-c)  =>  c = 1 - 2 E1 / (W0 + W1)
  const double c = 1.0 - 2.0 * p.E1 / (p.W0 + p.W1);
  if (!(c >= -1.0 && c <= 1.0))
    throw ConfigError("diabatic potentials do not cross (1 - 2E1/(W0+W1) = " +
                      std::to_string(c) + ")");
  return std::acos(c);
}

PotentialSet make_potentials(const ModelParams& p) {
  if (p.B <= 0.0) throw ConfigError("inverse inertia must be positive");
  if (p.sigma <= 0.0 && !p.constant_coupling) throw ConfigError("coupling width must be positive");
  const double W0 = p.W0 * units::eV, W1 = p.W1 * units::eV, E1 = p.E1 * units::eV;
  const double lam = p.coupling * units::eV, sig = p.sigma;
  PotentialSet s;
  s.B = p.B * units::eV;
  s.Vg = [W0](double a) { return 0.5 * W0 * (1.0 - std::cos(a)); };
  s.Ve = [E1, W1](double a) { return E1 - 0.5 * W1 * (1.0 - std::cos(a)); };
  if (p.constant_coupling) {
    s.Vge = [lam](double) { return lam; };
  } else {
    const double ax = crossing_angle(p);
    s.Vge = [lam, sig, ax](double a) {
      // fold into [-pi, pi) so the coupling is exactly 2pi periodic
      double r = std::remainder(a, 2.0 * units::pi);
      double d = std::abs(r) - ax;
      return lam * std::exp(-d * d / (2.0 * sig * sig));
    };
  }
  return s;
}

VectorXd periodic_grid(int N) {
  VectorXd a(N);
  for (int k = 0; k < N; ++k) a[k] = -units::pi + 2.0 * units::pi * k / N;
  return a;
}

MatrixXd kinetic_matrix(int N, double B) {
  // circulant: T_jk = (B/N) sum_{m=-N/2}^{N/2-1} m^2 cos(m * 2pi (j-k)/N)
  VectorXd row(N);
  for (int d = 0; d < N; ++d) {
    const int dd = std::min(d, N - d);  // keeps T exactly symmetric
    double s = 0.0;
    for (int m = -N / 2; m < N / 2; ++m)
      s += double(m) * m * std::cos(2.0 * units::pi * double(m) * dd / N);
    row[d] = B * s / N;
  }
  MatrixXd T(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) T(j, k) = row[(j - k + N) % N];
  return T;
}

GridHamiltonian build_hamiltonian(const PotentialSet& pot, int N) {
  if (N < 64) throw ConfigError("grid size N must be >= 64, got " + std::to_string(N));
  if (N % 2) throw ConfigError("grid size N must be even");
  GridHamiltonian gh;
  gh.N = N;
  gh.alpha = periodic_grid(N);
  const MatrixXd T = kinetic_matrix(N, pot.B);
  gh.H = MatrixXd::Zero(2 * N, 2 * N);
  gh.H.topLeftCorner(N, N) = T;
  gh.H.bottomRightCorner(N, N) = T;
  for (int k = 0; k < N; ++k) {
    const double a = gh.alpha[k];
    gh.H(k, k) += pot.Vg(a);
    gh.H(N + k, N + k) += pot.Ve(a);
    const double c = pot.Vge(a);
    gh.H(k, N + k) = c;
    gh.H(N + k, k) = c;
  }
  return gh;
}

Window cis_window() { return {{Surface::Ground, -units::pi / 3.0, units::pi / 3.0}}; }

Window trans_window(bool symmetric) {
  Window w{{Surface::Excited, -units::pi, -2.0 * units::pi / 3.0}};
  if (symmetric) w.push_back({Surface::Excited, 2.0 * units::pi / 3.0, units::pi});
  return w;
}

VectorXd window_mask(const VectorXd& alpha, const Window& w) {
  const int N = static_cast<int>(alpha.size());
  VectorXd m = VectorXd::Zero(2 * N);
  constexpr double tol = 1e-12;
  for (const auto& r : w) {
    if (!(r.b > r.a)) throw ConfigError("empty window range");
    if (r.a < -units::pi - tol || r.b > units::pi + tol)
      throw ConfigError("window range must lie within [-pi, pi]");
    const int off = r.surface == Surface::Ground ? 0 : N;
    for (int k = 0; k < N; ++k)
      if (alpha[k] >= r.a - tol && alpha[k] <= r.b + tol) m[off + k] = 1.0;
  }
  return m;
}

MatrixXd window_projector(const TorsionalSystem& sys, const Window& w) {
  const VectorXd m = window_mask(sys.alpha, w);
  return sys.vectors.transpose() * m.asDiagonal() * sys.vectors;
}

TorsionalSystem diagonalize(const GridHamiltonian& gh, const TruncationSpec& trunc, double mu0,
                            const Window& cis, const Window& trans) {
  if (!gh.H.isApprox(gh.H.transpose(), 1e-14))
    throw NumericalError("grid Hamiltonian is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gh.H);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

  const int N = gh.N, D = 2 * N;
  int M = 0;
  for (int i = 0; i < D; ++i)
    if (trunc.energy_cutoff <= 0.0 || es.eigenvalues()[i] <= trunc.energy_cutoff) ++M;
  if (trunc.max_states > 0) M = std::min(M, trunc.max_states);
  if (M < 2) throw ConfigError("basis truncation keeps fewer than two states");

  TorsionalSystem s;
  s.N = N;
  s.full_dim = D;
  s.alpha = gh.alpha;
  s.energies = es.eigenvalues().head(M);
  s.vectors = es.eigenvectors().leftCols(M);
  // deterministic sign: largest-magnitude component positive
  for (int i = 0; i < M; ++i) {
    Eigen::Index k;
    s.vectors.col(i).cwiseAbs().maxCoeff(&k);
    if (s.vectors(k, i) < 0) s.vectors.col(i) *= -1.0;
  }

  const MatrixXd R = gh.H * s.vectors - s.vectors * s.energies.asDiagonal();
  const double scale = std::max(std::abs(s.energies[M - 1]), std::abs(s.energies[0]));
  s.max_residual = R.colwise().norm().maxCoeff() / scale;
  s.orthonormality_error =
      (s.vectors.transpose() * s.vectors - MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff();
  if (s.max_residual > 1e-8 || s.orthonormality_error > 1e-10)
    throw NumericalError("eigenpairs fail residual/orthonormality checks");

  const auto Ug = s.vectors.topRows(N);
  const auto Ue = s.vectors.bottomRows(N);
  s.mu = mu0 * (Ug.transpose() * Ue + Ue.transpose() * Ug);
  s.mu = (0.5 * (s.mu + s.mu.transpose())).eval();

  VectorXd cosa(D);
  for (int k = 0; k < N; ++k) cosa[k] = cosa[N + k] = std::cos(gh.alpha[k]);
  s.Q = s.vectors.transpose() * cosa.asDiagonal() * s.vectors;
  s.Q = (0.5 * (s.Q + s.Q.transpose())).eval();

  const VectorXd mc = window_mask(gh.alpha, cis), mt = window_mask(gh.alpha, trans);
  if ((mc.array() * mt.array()).abs().maxCoeff() > 0)
    throw ConfigError("cis and trans windows overlap");
  s.theta_cis = s.vectors.transpose() * mc.asDiagonal() * s.vectors;
  s.theta_trans = s.vectors.transpose() * mt.asDiagonal() * s.vectors;
  s.theta_e = MatrixXd::Identity(M, M) - s.theta_cis - s.theta_trans;
  s.w_cis = s.theta_cis.diagonal();
  s.w_trans = s.theta_trans.diagonal();
  s.w_e = s.theta_e.diagonal();

  // parity under alpha_k -> -alpha_k, i.e. k -> (N - k) mod N on each block
  s.parity.resize(M);
  for (int i = 0; i < M; ++i) {
    double p = 0.0;
    for (int blk = 0; blk < 2; ++blk)
      for (int k = 0; k < N; ++k)
        p += s.vectors(blk * N + k, i) * s.vectors(blk * N + (N - k) % N, i);
    s.parity[i] = p;
  }

  // dipole sum-rule coverage of the ground state: mu|0> = mu0 * swap(v0)
  const auto& V = es.eigenvectors();
  VectorXd sv(D);
  sv << V.col(0).tail(N), V.col(0).head(N);
  const VectorXd proj = V.leftCols(M).transpose() * sv;
  s.mu_completeness = proj.squaredNorm() / sv.squaredNorm();
  return s;
}

TorsionalSystem build_system(const SystemConfig& cfg) {
  if (cfg.mu0_debye < 0.0) throw ConfigError("transition dipole must be >= 0");
  const PotentialSet pot = make_potentials(cfg.model);
  const GridHamiltonian gh = build_hamiltonian(pot, cfg.N);
  TruncationSpec t;
  t.energy_cutoff = (cfg.model.E1 + cfg.cutoff_above_E1_eV) * units::eV;
  t.max_states = cfg.max_states;
  return diagonalize(gh, t, cfg.mu0_debye * units::debye, cis_window(),
                     trans_window(cfg.symmetric_trans));
}

}  // namespace photoiso
